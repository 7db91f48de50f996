use std::collections::BTreeMap;

use super::{canonical_pair, Edge, EdgeMark, MixedGraph, TimedNode};
use crate::{Error, Result};

/// All pairs homologous to `(x, y)` inside a window of lags `0..=w`,
/// including the pair itself. The ordered roles of `x` and `y` are kept.
pub fn homology_set(pair: (TimedNode, TimedNode), w: usize) -> Vec<(TimedNode, TimedNode)> {
    let (x, y) = pair;
    let lo = x.lag.min(y.lag);
    let hi = x.lag.max(y.lag);
    if hi > w {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(w - (hi - lo) + 1);
    // shifts from -lo (touching lag 0) up to w - hi (touching lag w)
    for base in 0..=(w - (hi - lo)) {
        let (sx, sy) = (
            TimedNode::new(x.var, x.lag - lo + base),
            TimedNode::new(y.var, y.lag - lo + base),
        );
        out.push((sx, sy));
    }
    out
}

/// Homology-class representative: the copy shifted so its later endpoint is
/// at lag 0, together with the applied shift.
pub fn representative(x: TimedNode, y: TimedNode) -> ((TimedNode, TimedNode), usize) {
    let shift = x.lag.min(y.lag);
    let rx = TimedNode::new(x.var, x.lag - shift);
    let ry = TimedNode::new(y.var, y.lag - shift);
    (canonical_pair(rx, ry), shift)
}

/// Separating sets keyed by homology-class representative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetStore {
    sets: BTreeMap<(TimedNode, TimedNode), Vec<TimedNode>>,
}

impl SepsetStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `z` as separating `x` and `y`. Nodes of `z` are expressed in
    /// the same frame as `x` and `y`; they are stored relative to the
    /// representative pair.
    pub fn record(&mut self, x: TimedNode, y: TimedNode, z: &[TimedNode]) {
        let (rep, shift) = representative(x, y);
        let mut shifted: Vec<TimedNode> =
            z.iter().filter_map(|v| v.newer(shift)).collect();
        shifted.sort();
        self.sets.insert(rep, shifted);
    }

    /// The recorded separating set for `(x, y)` shifted into their frame.
    pub fn get(&self, x: TimedNode, y: TimedNode) -> Option<Vec<TimedNode>> {
        let (rep, shift) = representative(x, y);
        self.sets
            .get(&rep)
            .map(|z| z.iter().map(|v| v.older(shift)).collect())
    }

    /// Whether `v` belongs to the separating set recorded for `(x, y)`.
    /// `None` when no set was recorded.
    pub fn contains(&self, x: TimedNode, y: TimedNode, v: TimedNode) -> Option<bool> {
        let (rep, shift) = representative(x, y);
        let z = self.sets.get(&rep)?;
        Some(match v.newer(shift) {
            Some(sv) => z.binary_search(&sv).is_ok(),
            None => false,
        })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(TimedNode, TimedNode), &Vec<TimedNode>)> {
        self.sets.iter()
    }
}

/// A partial ancestral graph over a window of `w + 1` time-stamps with `n`
/// variables each, kept consistent across homologous pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicPag {
    n: usize,
    w: usize,
    graph: MixedGraph,
    pub sepsets: SepsetStore,
}

impl DynamicPag {
    /// Edgeless graph over the window.
    pub fn empty(n: usize, w: usize) -> Self {
        DynamicPag {
            n,
            w,
            graph: MixedGraph::new(n * (w + 1)),
            sepsets: SepsetStore::new(),
        }
    }

    /// Fully connected graph: `o-o` within a time-stamp, `o->` from the
    /// earlier to the later node across time-stamps.
    pub fn complete(n: usize, w: usize) -> Self {
        let mut g = Self::empty(n, w);
        let total = n * (w + 1);
        for a in 0..total {
            for b in (a + 1)..total {
                let (x, y) = (g.node(a), g.node(b));
                g.graph.add_edge(a, b, initial_mark(x, y), initial_mark(y, x));
            }
        }
        g
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn window(&self) -> usize {
        self.w
    }

    pub fn n_nodes(&self) -> usize {
        self.graph.n_nodes()
    }

    #[inline]
    pub fn node(&self, index: usize) -> TimedNode {
        TimedNode::from_index(index, self.n)
    }

    #[inline]
    pub fn index(&self, v: TimedNode) -> usize {
        v.index(self.n)
    }

    pub fn nodes(&self) -> impl Iterator<Item = TimedNode> + '_ {
        (0..self.n_nodes()).map(|i| self.node(i))
    }

    pub fn contains_node(&self, v: TimedNode) -> bool {
        v.var < self.n && v.lag <= self.w
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn is_adjacent(&self, x: TimedNode, y: TimedNode) -> bool {
        self.contains_node(x)
            && self.contains_node(y)
            && self.graph.is_adjacent(self.index(x), self.index(y))
    }

    pub fn mark_at(&self, at: TimedNode, other: TimedNode) -> Option<EdgeMark> {
        if !self.contains_node(at) || !self.contains_node(other) {
            return None;
        }
        self.graph.mark_at(self.index(at), self.index(other))
    }

    /// Whether the mark at `at` on its edge to `other` is fixed to a head:
    /// `at` is the later endpoint of a temporal pair.
    #[inline]
    pub fn is_fixed(at: TimedNode, other: TimedNode) -> bool {
        at.lag < other.lag
    }

    /// Adds the pair and all its homologous copies with the given marks.
    pub fn add_edge_homologous(
        &mut self,
        x: TimedNode,
        y: TimedNode,
        mark_at_x: EdgeMark,
        mark_at_y: EdgeMark,
    ) -> Result<()> {
        self.check_pair(x, y)?;
        for (m, at, other) in [(mark_at_x, x, y), (mark_at_y, y, x)] {
            if Self::is_fixed(at, other) && m != EdgeMark::Head {
                return Err(Error::FixedMark { at, mark: m });
            }
        }
        for (sx, sy) in homology_set((x, y), self.w) {
            let (a, b) = (self.index(sx), self.index(sy));
            self.graph.add_edge(a, b, mark_at_x, mark_at_y);
        }
        Ok(())
    }

    /// Removes `(x, y)` and every homologous pair. In strict mode a missing
    /// edge is an error, otherwise it is a no-op.
    pub fn remove_edge_homologous(&mut self, x: TimedNode, y: TimedNode, strict: bool) -> Result<()> {
        self.check_pair(x, y)?;
        if !self.is_adjacent(x, y) {
            return if strict { Err(Error::NotAnEdge(x, y)) } else { Ok(()) };
        }
        for (sx, sy) in homology_set((x, y), self.w) {
            let (a, b) = (self.index(sx), self.index(sy));
            self.graph.remove_edge(a, b);
        }
        Ok(())
    }

    /// Sets the mark at `at` on edge `at`–`other` and at the same role of
    /// every homologous edge.
    pub fn set_mark_homologous(&mut self, at: TimedNode, other: TimedNode, mark: EdgeMark) -> Result<()> {
        self.check_pair(at, other)?;
        if !self.is_adjacent(at, other) {
            return Err(Error::NotAnEdge(at, other));
        }
        if Self::is_fixed(at, other) && mark != EdgeMark::Head {
            return Err(Error::FixedMark { at, mark });
        }
        for (sa, so) in homology_set((at, other), self.w) {
            let (a, b) = (self.index(sa), self.index(so));
            self.graph.set_mark(a, b, mark);
        }
        Ok(())
    }

    /// Resets every non-fixed mark to a circle.
    pub fn reset_marks(&mut self) {
        for (a, b) in self.graph.edges() {
            let (x, y) = (self.node(a), self.node(b));
            self.graph.set_mark(a, b, initial_mark(x, y));
            self.graph.set_mark(b, a, initial_mark(y, x));
        }
    }

    pub fn edge(&self, x: TimedNode, y: TimedNode) -> Option<Edge> {
        let mx = self.mark_at(x, y)?;
        let my = self.mark_at(y, x)?;
        Some(Edge::new(x, y, mx, my))
    }

    /// All edges, canonically oriented and sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .graph
            .edges()
            .into_iter()
            .map(|(a, b)| self.edge(self.node(a), self.node(b)).expect("listed edge"))
            .collect();
        out.sort_by_key(edge_sort_key);
        out
    }

    /// One representative per homology class: the edges touching lag 0.
    pub fn minimal_edge_set(&self) -> Vec<Edge> {
        self.edges()
            .into_iter()
            .filter(|e| e.a.lag.min(e.b.lag) == 0)
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Checks that homologous pairs agree on adjacency and marks and that
    /// fixed temporal heads are in place. Returns the first violation.
    pub fn audit(&self) -> std::result::Result<(), String> {
        for a in 0..self.n_nodes() {
            for b in (a + 1)..self.n_nodes() {
                let (x, y) = (self.node(a), self.node(b));
                let here = (self.mark_at(x, y), self.mark_at(y, x));
                for (sx, sy) in homology_set((x, y), self.w) {
                    let there = (self.mark_at(sx, sy), self.mark_at(sy, sx));
                    if here != there {
                        return Err(format!("{x}–{y} {here:?} differs from {sx}–{sy} {there:?}"));
                    }
                }
                if here.0.is_some() {
                    if Self::is_fixed(x, y) && here.0 != Some(EdgeMark::Head) {
                        return Err(format!("fixed head missing at {x} on {x}–{y}"));
                    }
                    if Self::is_fixed(y, x) && here.1 != Some(EdgeMark::Head) {
                        return Err(format!("fixed head missing at {y} on {x}–{y}"));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_pair(&self, x: TimedNode, y: TimedNode) -> Result<()> {
        for v in [x, y] {
            if !self.contains_node(v) {
                return Err(Error::NodeOutOfRange { node: v.index(self.n.max(1)), size: self.n_nodes() });
            }
        }
        if x == y {
            return Err(Error::param(format!("self pair {x}")));
        }
        Ok(())
    }
}

fn initial_mark(at: TimedNode, other: TimedNode) -> EdgeMark {
    if DynamicPag::is_fixed(at, other) {
        EdgeMark::Head
    } else {
        EdgeMark::Circle
    }
}

pub(crate) fn edge_sort_key(e: &Edge) -> (std::cmp::Reverse<usize>, usize, std::cmp::Reverse<usize>, usize) {
    use std::cmp::Reverse;
    (Reverse(e.a.lag), e.a.var, Reverse(e.b.lag), e.b.var)
}
