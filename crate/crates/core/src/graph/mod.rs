//! Mixed graphs over time-indexed nodes.
//!
//! A [`MixedGraph`] stores one optional [`EdgeMark`] per ordered node pair:
//! `mark_at(a, b)` is the mark sitting at `a` on the edge between `a` and `b`.
//! MAGs use only heads and tails, PAGs add circles. [`DynamicPag`] layers the
//! time-window structure (homology, fixed temporal heads, separating sets) on
//! top of a mixed graph whose node `i` is `TimedNode::from_index(i, n)`.

mod dag;
mod dynamic;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dag::{Dag, Mag};
pub use dynamic::{homology_set, representative, DynamicPag, SepsetStore};
pub use text::{format_edges, parse_graph_text, VarNames};

/// A variable observed `lag` steps before the present (lag 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TimedNode {
    pub var: usize,
    pub lag: usize,
}

impl TimedNode {
    pub const fn new(var: usize, lag: usize) -> Self {
        TimedNode { var, lag }
    }

    /// Dense index inside a window with `n` variables per time-stamp.
    #[inline]
    pub fn index(self, n: usize) -> usize {
        self.lag * n + self.var
    }

    #[inline]
    pub fn from_index(index: usize, n: usize) -> Self {
        TimedNode { var: index % n, lag: index / n }
    }

    /// Moves the node `k` steps further into the past.
    #[inline]
    pub fn older(self, k: usize) -> Self {
        TimedNode { var: self.var, lag: self.lag + k }
    }

    /// Moves the node `k` steps towards the present, if it stays at lag >= 0.
    #[inline]
    pub fn newer(self, k: usize) -> Option<Self> {
        self.lag.checked_sub(k).map(|lag| TimedNode { var: self.var, lag })
    }
}

impl fmt::Display for TimedNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lag == 0 {
            write!(f, "X{}(t)", self.var)
        } else {
            write!(f, "X{}(t-{})", self.var, self.lag)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeMark {
    /// Undetermined within the equivalence class.
    Circle,
    Head,
    Tail,
}

/// An edge between two distinct timed nodes, stored with the canonical
/// endpoint first (larger lag, then smaller variable index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub a: TimedNode,
    pub b: TimedNode,
    pub mark_at_a: EdgeMark,
    pub mark_at_b: EdgeMark,
}

/// Orders an unordered pair canonically: larger lag first, ties broken by the
/// smaller variable index.
pub fn canonical_pair(x: TimedNode, y: TimedNode) -> (TimedNode, TimedNode) {
    if (x.lag > y.lag) || (x.lag == y.lag && x.var <= y.var) {
        (x, y)
    } else {
        (y, x)
    }
}

impl Edge {
    pub fn new(x: TimedNode, y: TimedNode, mark_at_x: EdgeMark, mark_at_y: EdgeMark) -> Self {
        let (a, b) = canonical_pair(x, y);
        if a == x {
            Edge { a, b, mark_at_a: mark_at_x, mark_at_b: mark_at_y }
        } else {
            Edge { a, b, mark_at_a: mark_at_y, mark_at_b: mark_at_x }
        }
    }

    pub fn is_temporal(&self) -> bool {
        self.a.lag != self.b.lag
    }
}

/// Dense mixed graph over nodes `0..n_nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedGraph {
    n_nodes: usize,
    marks: Vec<Option<EdgeMark>>,
}

impl MixedGraph {
    pub fn new(n_nodes: usize) -> Self {
        MixedGraph { n_nodes, marks: vec![None; n_nodes * n_nodes] }
    }

    pub fn complete(n_nodes: usize, mark: EdgeMark) -> Self {
        let mut g = Self::new(n_nodes);
        for a in 0..n_nodes {
            for b in (a + 1)..n_nodes {
                g.add_edge(a, b, mark, mark);
            }
        }
        g
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Mark at `at` on the edge `at`–`other`, `None` if not adjacent.
    #[inline]
    pub fn mark_at(&self, at: usize, other: usize) -> Option<EdgeMark> {
        self.marks[at * self.n_nodes + other]
    }

    #[inline]
    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.marks[a * self.n_nodes + b].is_some()
    }

    pub fn add_edge(&mut self, a: usize, b: usize, mark_at_a: EdgeMark, mark_at_b: EdgeMark) {
        assert!(a != b, "self loops are not allowed");
        self.marks[a * self.n_nodes + b] = Some(mark_at_a);
        self.marks[b * self.n_nodes + a] = Some(mark_at_b);
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.marks[a * self.n_nodes + b] = None;
        self.marks[b * self.n_nodes + a] = None;
    }

    /// Overwrites the mark at `at`; the edge must exist.
    #[inline]
    pub fn set_mark(&mut self, at: usize, other: usize, mark: EdgeMark) {
        debug_assert!(self.is_adjacent(at, other));
        self.marks[at * self.n_nodes + other] = Some(mark);
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.marks[a * self.n_nodes..(a + 1) * self.n_nodes];
        row.iter().enumerate().filter_map(|(b, m)| m.map(|_| b))
    }

    pub fn degree(&self, a: usize) -> usize {
        self.neighbors(a).count()
    }

    /// Edges as `(a, b)` with `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n_nodes {
            for b in (a + 1)..self.n_nodes {
                if self.is_adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.marks.iter().filter(|m| m.is_some()).count() / 2
    }

    /// `a -> b`: tail at `a`, head at `b`.
    #[inline]
    pub fn is_directed(&self, a: usize, b: usize) -> bool {
        self.mark_at(a, b) == Some(EdgeMark::Tail) && self.mark_at(b, a) == Some(EdgeMark::Head)
    }
}
