//! Conditioning-set machinery of iterative causal discovery: possible
//! ancestry, PDS-paths, ICD-Sep candidate enumeration and orientation.

mod orient;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeMark, MixedGraph};
use crate::separation::for_each_subset;

pub use orient::{orient, MarkConflict, Rule};

/// Indicator of the nodes that have a possibly directed path into one of
/// `targets` (every edge on the path has a tail or circle at its source
/// side). Targets are included.
pub fn possible_ancestors_of(g: &MixedGraph, targets: &[usize]) -> Vec<bool> {
    let mut out = vec![false; g.n_nodes()];
    let mut stack: Vec<usize> = targets.to_vec();
    while let Some(v) = stack.pop() {
        if std::mem::replace(&mut out[v], true) {
            continue;
        }
        for u in g.neighbors(v) {
            if !out[u] && matches!(g.mark_at(u, v), Some(EdgeMark::Tail | EdgeMark::Circle)) {
                stack.push(u);
            }
        }
    }
    out
}

pub fn possible_ancestor(g: &MixedGraph, z: usize, a: usize) -> bool {
    possible_ancestors_of(g, &[a])[z]
}

/// Whether `v` may sit between `u` and `w` on a PDS-path: it is a collider
/// or the three nodes form a triangle.
#[inline]
fn pds_step_ok(g: &MixedGraph, u: usize, v: usize, w: usize) -> bool {
    (g.mark_at(v, u) == Some(EdgeMark::Head) && g.mark_at(v, w) == Some(EdgeMark::Head))
        || g.is_adjacent(u, w)
}

/// Shortest PDS-path length from `a` to every node reachable within `r`
/// edges, never visiting `b`.
pub fn pds_reachable(g: &MixedGraph, a: usize, b: usize, r: usize) -> BTreeMap<usize, usize> {
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    if r == 0 {
        return best;
    }
    let n = g.n_nodes();
    let mut on_path = vec![false; n];
    on_path[a] = true;
    on_path[b] = true;
    let mut path = vec![a];
    pds_dfs(g, r, &mut path, &mut on_path, &mut best);
    best
}

fn pds_dfs(
    g: &MixedGraph,
    budget: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    best: &mut BTreeMap<usize, usize>,
) {
    let len = path.len(); // nodes on path, so the next node is at distance `len`
    if len > budget {
        return;
    }
    let v = *path.last().expect("non-empty path");
    let prev = if len >= 2 { Some(path[len - 2]) } else { None };
    let nbrs: Vec<usize> = g.neighbors(v).collect();
    for w in nbrs {
        if on_path[w] {
            continue;
        }
        if let Some(u) = prev {
            if !pds_step_ok(g, u, v, w) {
                continue;
            }
        }
        let e = best.entry(w).or_insert(len);
        if len < *e {
            *e = len;
        }
        on_path[w] = true;
        path.push(w);
        pds_dfs(g, budget, path, on_path, best);
        path.pop();
        on_path[w] = false;
    }
}

/// Whether every node of `z` is reached from `anchor` by a PDS-path whose
/// nodes other than the anchor all lie in `z`.
fn pds_closed(g: &MixedGraph, anchor: usize, z: &[usize]) -> bool {
    let mut reached = vec![false; z.len()];
    let mut path = vec![anchor];
    let mut used = vec![false; z.len()];
    closed_dfs(g, z, &mut path, &mut used, &mut reached);
    reached.iter().all(|&r| r)
}

fn closed_dfs(g: &MixedGraph, z: &[usize], path: &mut Vec<usize>, used: &mut [bool], reached: &mut [bool]) {
    if reached.iter().all(|&r| r) {
        return;
    }
    let len = path.len();
    let v = path[len - 1];
    for (k, &w) in z.iter().enumerate() {
        if used[k] || !g.is_adjacent(v, w) {
            continue;
        }
        if len >= 2 && !pds_step_ok(g, path[len - 2], v, w) {
            continue;
        }
        reached[k] = true;
        used[k] = true;
        path.push(w);
        closed_dfs(g, z, path, used, reached);
        path.pop();
        used[k] = false;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    A,
    B,
}

/// One conditioning set complying with the ICD-Sep conditions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IcdSepCandidate {
    /// Sorted node indices.
    pub z_set: Vec<usize>,
    pub r: usize,
    /// Endpoint whose PDS-paths produced the set first.
    pub side: Anchor,
}

/// Conditioning sets of size `r` for the pair `(a, b)`.
///
/// A set qualifies when, for one anchor endpoint, each member is reached from
/// the anchor by a PDS-path avoiding the other endpoint whose nodes besides the
/// anchor all lie in the set (so its length is at most `r`), and each member
/// is a possible ancestor of `a` or `b`. Both endpoints are tried as anchor;
/// the result is deduplicated and sorted lexicographically.
pub fn pd_sep_range(g: &MixedGraph, a: usize, b: usize, r: usize) -> Vec<IcdSepCandidate> {
    if r == 0 {
        return vec![IcdSepCandidate { z_set: Vec::new(), r: 0, side: Anchor::A }];
    }
    let poss_anc = possible_ancestors_of(g, &[a, b]);
    let mut found: BTreeMap<Vec<usize>, Anchor> = BTreeMap::new();
    for (anchor, other, side) in [(a, b, Anchor::A), (b, a, Anchor::B)] {
        let reach = pds_reachable(g, anchor, other, r);
        let pool: Vec<usize> = reach.keys().copied().filter(|&v| poss_anc[v]).collect();
        for_each_subset(&pool, r, |z| {
            if !found.contains_key(z) && pds_closed(g, anchor, z) {
                found.insert(z.to_vec(), side);
            }
            false
        });
    }
    found
        .into_iter()
        .map(|(z_set, side)| IcdSepCandidate { z_set, r, side })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestry_marks() {
        let mut g = MixedGraph::new(2);
        g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Head);
        assert!(possible_ancestor(&g, 0, 1));
        assert!(!possible_ancestor(&g, 1, 0));
        let mut g = MixedGraph::new(2);
        g.add_edge(0, 1, EdgeMark::Head, EdgeMark::Head);
        assert!(!possible_ancestor(&g, 0, 1));
        assert!(possible_ancestor(&g, 0, 0));
    }

    #[test]
    fn pds_single_edge_and_blocked_path() {
        // a=0 o-o v=1 o-o z=2, no triangle, 1 not a collider
        let mut g = MixedGraph::new(4);
        g.add_edge(0, 1, EdgeMark::Circle, EdgeMark::Circle);
        g.add_edge(1, 2, EdgeMark::Circle, EdgeMark::Circle);
        g.add_edge(0, 3, EdgeMark::Circle, EdgeMark::Circle);
        let reach = pds_reachable(&g, 0, 3, 3);
        assert_eq!(reach.get(&1), Some(&1));
        assert_eq!(reach.get(&2), None);
        assert!(pds_reachable(&g, 0, 3, 0).is_empty());

        // make 1 a collider: 0 *-> 1 <-* 2
        g.set_mark(1, 0, EdgeMark::Head);
        g.set_mark(1, 2, EdgeMark::Head);
        assert_eq!(pds_reachable(&g, 0, 3, 3).get(&2), Some(&2));
        assert_eq!(pds_reachable(&g, 0, 3, 1).get(&2), None);
    }

    #[test]
    fn sep_range_examples() {
        let g = MixedGraph::complete(3, EdgeMark::Circle);
        let c = pd_sep_range(&g, 0, 1, 0);
        assert_eq!(c.len(), 1);
        assert!(c[0].z_set.is_empty());

        // a o-o z o-o b plus a o-o b
        let c = pd_sep_range(&g, 0, 2, 1);
        assert_eq!(c.iter().map(|c| c.z_set.clone()).collect::<Vec<_>>(), vec![vec![1]]);
        assert!(c.iter().all(|c| c.r == 1));

        // z <-> b and z <-> a: not a possible ancestor of either
        let mut g = MixedGraph::new(3);
        g.add_edge(0, 2, EdgeMark::Circle, EdgeMark::Circle);
        g.add_edge(0, 1, EdgeMark::Head, EdgeMark::Head);
        g.add_edge(1, 2, EdgeMark::Head, EdgeMark::Head);
        assert!(pd_sep_range(&g, 0, 2, 1).is_empty());
    }
}
