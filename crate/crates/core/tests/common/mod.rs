//! Brute-force oracles and random graph generators shared by the
//! integration tests. Everything here enumerates paths or subsets
//! explicitly and is only meant for graphs of a handful of nodes.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsicd::graph::{Dag, EdgeMark, Mag, MixedGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DAG over `n` nodes: a shuffled order and each forward pair
/// joined with probability `p`.
pub fn random_dag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Dag {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut g = Dag::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                g.add_edge(order[i], order[j]).expect("forward edge keeps the order acyclic");
            }
        }
    }
    g
}

/// Random ancestral graph with directed and bidirected edges, by rejection.
pub fn random_mag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Mag {
    loop {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut g = MixedGraph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(p) {
                    let (a, b) = (order[i], order[j]);
                    if rng.random_bool(0.3) {
                        g.add_edge(a, b, EdgeMark::Head, EdgeMark::Head);
                    } else {
                        g.add_edge(a, b, EdgeMark::Tail, EdgeMark::Head);
                    }
                }
            }
        }
        if let Ok(m) = Mag::new(g) {
            return m;
        }
    }
}

/// Mixed graph with arbitrary marks from {circle, head, tail}.
pub fn random_pag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> MixedGraph {
    let marks = [EdgeMark::Circle, EdgeMark::Head, EdgeMark::Tail];
    let mut g = MixedGraph::new(n);
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.random_bool(p) {
                let ma = marks[rng.random_range(0..3)];
                let mb = marks[rng.random_range(0..3)];
                g.add_edge(a, b, ma, mb);
            }
        }
    }
    g
}

pub fn dag_as_mixed(g: &Dag) -> MixedGraph {
    let n = g.n_nodes();
    let mut m = MixedGraph::new(n);
    for v in 0..n {
        for &c in g.children(v) {
            m.add_edge(v, c, EdgeMark::Tail, EdgeMark::Head);
        }
    }
    m
}

/// Every simple path from `x` to `y`, as node sequences.
pub fn simple_paths(g: &MixedGraph, x: usize, y: usize) -> Vec<Vec<usize>> {
    fn go(g: &MixedGraph, y: usize, path: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == y {
            out.push(path.clone());
            return;
        }
        for u in g.neighbors(v).collect::<Vec<_>>() {
            if !used[u] {
                used[u] = true;
                path.push(u);
                go(g, y, path, used, out);
                path.pop();
                used[u] = false;
            }
        }
    }
    let mut used = vec![false; g.n_nodes()];
    used[x] = true;
    let mut out = Vec::new();
    go(g, y, &mut vec![x], &mut used, &mut out);
    out
}

/// Transitive closure of directed (tail-head) edges; `anc[a][b]`: a is an
/// ancestor of b, reflexive.
pub fn ancestor_matrix(g: &MixedGraph) -> Vec<Vec<bool>> {
    let n = g.n_nodes();
    let mut anc = vec![vec![false; n]; n];
    for a in 0..n {
        anc[a][a] = true;
        for b in g.neighbors(a) {
            if g.mark_at(a, b) == Some(EdgeMark::Tail) && g.mark_at(b, a) == Some(EdgeMark::Head) {
                anc[a][b] = true;
            }
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if anc[a][k] && anc[k][b] {
                    anc[a][b] = true;
                }
            }
        }
    }
    anc
}

/// Separation by exhaustive path enumeration: a path is open when every
/// non-collider is outside `z` and every collider is an ancestor of `z`.
/// A collider is a node with arrowheads from both path neighbours. This
/// is d-separation on DAGs and m-separation on ancestral graphs.
pub fn separated_by_paths(g: &MixedGraph, x: usize, y: usize, z: &[usize]) -> bool {
    let anc = ancestor_matrix(g);
    let an_z = |v: usize| z.iter().any(|&s| anc[v][s]);
    simple_paths(g, x, y).iter().all(|path| {
        path.windows(3).any(|t| {
            let (u, v, w) = (t[0], t[1], t[2]);
            let collider =
                g.mark_at(v, u) == Some(EdgeMark::Head) && g.mark_at(v, w) == Some(EdgeMark::Head);
            if collider {
                !an_z(v)
            } else {
                z.contains(&v)
            }
        })
    })
}

/// Subsets of `pool` with at most `max` elements.
pub fn subsets_up_to(pool: &[usize], max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u64..(1 << pool.len()) {
        if mask.count_ones() as usize <= max {
            out.push((0..pool.len()).filter(|&k| mask >> k & 1 == 1).map(|k| pool[k]).collect());
        }
    }
    out
}

/// Whether some path from `z` to `t` has no arrowhead at the nearer end of
/// any of its edges.
pub fn possibly_ancestral_path(g: &MixedGraph, z: usize, t: usize) -> bool {
    if z == t {
        return true;
    }
    simple_paths(g, z, t).iter().any(|p| {
        p.windows(2)
            .all(|e| matches!(g.mark_at(e[0], e[1]), Some(EdgeMark::Tail | EdgeMark::Circle)))
    })
}

/// Whether `path` (starting at the anchor) is a PDS-path: every interior
/// node is a collider on it or its two path neighbours are adjacent.
pub fn is_pds_path(g: &MixedGraph, path: &[usize]) -> bool {
    path.windows(3).all(|t| {
        let (u, v, w) = (t[0], t[1], t[2]);
        (g.mark_at(v, u) == Some(EdgeMark::Head) && g.mark_at(v, w) == Some(EdgeMark::Head))
            || g.is_adjacent(u, w)
    })
}

/// Conditioning sets of size `r` for `(a, b)` by direct filtering of all
/// subsets against the three ICD-Sep conditions, sorted.
pub fn brute_icd_sep(g: &MixedGraph, a: usize, b: usize, r: usize) -> Vec<Vec<usize>> {
    let n = g.n_nodes();
    let pool: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
    let mut out = Vec::new();
    for z in subsets_up_to(&pool, r).into_iter().filter(|z| z.len() == r) {
        let ok = [(a, b), (b, a)].iter().any(|&(anchor, other)| {
            z.iter().all(|&v| {
                let reached = simple_paths(g, anchor, v).iter().any(|p| {
                    !p.contains(&other) && p[1..].iter().all(|u| z.contains(u)) && is_pds_path(g, p)
                });
                reached && (possibly_ancestral_path(g, v, a) || possibly_ancestral_path(g, v, b))
            })
        });
        if ok {
            out.push(z);
        }
    }
    out.sort();
    out
}
