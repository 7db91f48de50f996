//! Graphical separation criteria, latent projection and ground-truth PAGs.

use crate::graph::{Dag, DynamicPag, EdgeMark, Mag, MixedGraph, TimedNode};
use crate::icd::orient;
use crate::svar::SvarModel;
use crate::{Error, Result};

fn check_query(n: usize, x: usize, y: usize, z: &[usize]) -> Result<()> {
    for &v in [x, y].iter().chain(z) {
        if v >= n {
            return Err(Error::NodeOutOfRange { node: v, size: n });
        }
    }
    if x == y || z.contains(&x) || z.contains(&y) {
        return Err(Error::param("query endpoints must be distinct and outside the conditioning set"));
    }
    Ok(())
}

/// d-separation of `x` and `y` given `z` in a DAG (reachability formulation).
pub fn d_separated(g: &Dag, x: usize, y: usize, z: &[usize]) -> Result<bool> {
    check_query(g.n_nodes(), x, y, z)?;
    Ok(!d_connected(g, x, y, z))
}

fn d_connected(g: &Dag, x: usize, y: usize, z: &[usize]) -> bool {
    let n = g.n_nodes();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let an_z = g.ancestors_of(z);
    // state: (node, arrived from a child = travelling up)
    let mut seen = vec![[false; 2]; n];
    let mut stack = vec![(x, true)];
    while let Some((v, up)) = stack.pop() {
        if std::mem::replace(&mut seen[v][up as usize], true) {
            continue;
        }
        if v == y {
            return true;
        }
        if up {
            if v == x || !in_z[v] {
                stack.extend(g.parents(v).iter().map(|&p| (p, true)));
                stack.extend(g.children(v).iter().map(|&c| (c, false)));
            }
        } else {
            if !in_z[v] {
                stack.extend(g.children(v).iter().map(|&c| (c, false)));
            }
            if an_z[v] {
                stack.extend(g.parents(v).iter().map(|&p| (p, true)));
            }
        }
    }
    false
}

/// m-separation of `x` and `y` given `z` in a MAG.
pub fn m_separated(g: &Mag, x: usize, y: usize, z: &[usize]) -> Result<bool> {
    check_query(g.n_nodes(), x, y, z)?;
    Ok(!m_connected(g, x, y, z))
}

pub(crate) fn m_connected(g: &Mag, x: usize, y: usize, z: &[usize]) -> bool {
    let mg = g.graph();
    let n = mg.n_nodes();
    let mut in_z = vec![false; n];
    for &v in z {
        in_z[v] = true;
    }
    let an_z = g.ancestors_of(z);
    // state: (node, arrived through an arrowhead at the node)
    let mut seen = vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = Vec::new();
    for u in mg.neighbors(x) {
        stack.push((u, mg.mark_at(u, x) == Some(EdgeMark::Head)));
    }
    while let Some((v, head_in)) = stack.pop() {
        if v == y {
            return true;
        }
        if std::mem::replace(&mut seen[v][head_in as usize], true) {
            continue;
        }
        for u in mg.neighbors(v) {
            let collider = head_in && mg.mark_at(v, u) == Some(EdgeMark::Head);
            let pass = if collider { an_z[v] } else { !in_z[v] };
            if pass {
                stack.push((u, mg.mark_at(u, v) == Some(EdgeMark::Head)));
            }
        }
    }
    false
}

/// The MAG over `observed` (in the given order) obtained by marginalising
/// every other node of `g`.
///
/// Two observed nodes are adjacent iff they stay d-connected given their
/// observed ancestors; the mark at `a` is a tail iff `a` is an ancestor of `b`.
pub fn latent_project(g: &Dag, observed: &[usize]) -> Result<Mag> {
    for &v in observed {
        g.check(v)?;
    }
    let m = observed.len();
    let anc: Vec<Vec<bool>> = observed.iter().map(|&v| g.ancestors_of(&[v])).collect();
    let mut out = MixedGraph::new(m);
    let mut cond = Vec::with_capacity(m);
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (observed[i], observed[j]);
            cond.clear();
            cond.extend(
                observed
                    .iter()
                    .copied()
                    .filter(|&v| v != a && v != b && (anc[i][v] || anc[j][v])),
            );
            if d_connected(g, a, b, &cond) {
                let mark_a = if anc[j][a] { EdgeMark::Tail } else { EdgeMark::Head };
                let mark_b = if anc[i][b] { EdgeMark::Tail } else { EdgeMark::Head };
                out.add_edge(i, j, mark_a, mark_b);
            }
        }
    }
    Mag::new(out)
}

/// Subsets of `pool` with exactly `size` elements, in lexicographic order.
pub(crate) fn for_each_subset(pool: &[usize], size: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if size > pool.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut buf = vec![0; size];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            buf[k] = pool[i];
        }
        if f(&buf) {
            return;
        }
        // rightmost position that can still advance
        let Some(k) = (0..size).rev().find(|&k| idx[k] < k + pool.len() - size) else {
            return;
        };
        idx[k] += 1;
        for j in (k + 1)..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest subset size searched exhaustively before falling back to the
/// ancestral separator.
pub const EXHAUSTIVE_SEPSET_SIZE: usize = 3;

/// A set m-separating the non-adjacent `a` and `b`: the first one found by
/// increasing-size search, or their observed ancestors if none is small.
pub fn find_sepset(mag: &Mag, a: usize, b: usize) -> Option<Vec<usize>> {
    let n = mag.n_nodes();
    let pool: Vec<usize> = (0..n).filter(|&v| v != a && v != b).collect();
    for size in 0..=EXHAUSTIVE_SEPSET_SIZE.min(pool.len()) {
        let mut found = None;
        for_each_subset(&pool, size, |z| {
            if !m_connected(mag, a, b, z) {
                found = Some(z.to_vec());
                true
            } else {
                false
            }
        });
        if found.is_some() {
            return found;
        }
    }
    let anc = mag.ancestors_of(&[a, b]);
    let z: Vec<usize> = pool.into_iter().filter(|&v| anc[v]).collect();
    if m_connected(mag, a, b, &z) {
        None
    } else {
        Some(z)
    }
}

/// Completed PAG of a MAG, over a single time-stamp (`w = 0`).
pub fn ground_truth_pag(mag: &Mag) -> DynamicPag {
    let n = mag.n_nodes();
    let mut pag = DynamicPag::empty(n, 0);
    let g = mag.graph();
    for a in 0..n {
        for b in (a + 1)..n {
            let (x, y) = (TimedNode::new(a, 0), TimedNode::new(b, 0));
            if g.is_adjacent(a, b) {
                pag.add_edge_homologous(x, y, EdgeMark::Circle, EdgeMark::Circle)
                    .expect("contemporaneous edge");
            } else if let Some(z) = find_sepset(mag, a, b) {
                let z: Vec<TimedNode> = z.into_iter().map(|v| TimedNode::new(v, 0)).collect();
                pag.sepsets.record(x, y, &z);
            }
        }
    }
    orient(&mut pag);
    pag
}

/// Unrolled time-series DAG, its window MAG and the completed dynamic PAG.
#[derive(Debug, Clone)]
pub struct DynamicGroundTruth {
    /// Unrolled DAG; node `lag * n_total + var`.
    pub dag: Dag,
    /// Depth of the unrolled DAG (oldest lag present).
    pub depth: usize,
    /// MAG over the observed window nodes, node `lag * n_observed + var`.
    pub mag: Mag,
    /// Completed dynamic PAG; one edge per homology class of the lag-0
    /// anchored pairs of `mag`, marks from the orientation engine.
    pub pag: DynamicPag,
}

impl DynamicGroundTruth {
    pub fn n_observed(&self) -> usize {
        self.pag.n_vars()
    }
}

/// Stop growing the buffer after this many extensions by `τ`.
pub const MAX_BUFFER_EXTENSIONS: usize = 16;

/// Window ground truth of the stationary process.
///
/// Truncating the unrolled graph drops common ancestors whose connecting
/// lag chains reach beyond the buffer, and older window slices are hit
/// first, so a short buffer yields a window MAG that is not shift-invariant.
/// The buffer starts at `n_total * τ`, enough for a minimal directed chain
/// through every variable, and grows by `τ` until the window MAG stops
/// changing.
pub fn unrolled_ground_truth(model: &SvarModel, w: usize) -> Result<DynamicGroundTruth> {
    let step = model.tau().max(1);
    let mut buffer = model.n_total() * step;
    let mut cur = unrolled_ground_truth_with_buffer(model, w, buffer)?;
    for _ in 0..MAX_BUFFER_EXTENSIONS {
        buffer += step;
        let next = unrolled_ground_truth_with_buffer(model, w, buffer)?;
        if next.mag == cur.mag {
            return Ok(cur);
        }
        cur = next;
    }
    Err(Error::param(format!("window MAG did not stabilise within a buffer of {buffer} lags")))
}

/// As [`unrolled_ground_truth`] with an explicit buffer of latent past
/// time-stamps beyond the window.
pub fn unrolled_ground_truth_with_buffer(
    model: &SvarModel,
    w: usize,
    buffer: usize,
) -> Result<DynamicGroundTruth> {
    if w < model.tau() {
        return Err(Error::param(format!("window {w} is shorter than the model order {}", model.tau())));
    }
    let depth = w + buffer;
    let dag = model.unroll(depth, w)?;
    let nt = model.n_total();
    let observed_vars = model.observed_vars();
    let n_obs = observed_vars.len();
    let mut window = Vec::with_capacity(n_obs * (w + 1));
    for lag in 0..=w {
        for &v in &observed_vars {
            window.push(lag * nt + v);
        }
    }
    let mag = latent_project(&dag, &window)?;
    let pag = stationary_pag(&mag, n_obs, w);
    Ok(DynamicGroundTruth { dag, depth, mag, pag })
}

/// Completed dynamic PAG from a window MAG: adjacency of each homology class
/// is read off its lag-0 anchored pair, separating sets are searched for those
/// pairs, and marks come from the orientation engine.
pub fn stationary_pag(mag: &Mag, n: usize, w: usize) -> DynamicPag {
    let mut pag = DynamicPag::empty(n, w);
    let g = mag.graph();
    for later in 0..n {
        let y = TimedNode::new(later, 0);
        for x in (0..n * (w + 1)).map(|i| TimedNode::from_index(i, n)) {
            // one visit per representative pair
            if x == y || (x.lag == 0 && x.var <= y.var) {
                continue;
            }
            let (a, b) = (x.index(n), y.index(n));
            if g.is_adjacent(a, b) {
                let (mx, my) = if x.lag > 0 {
                    (EdgeMark::Circle, EdgeMark::Head)
                } else {
                    (EdgeMark::Circle, EdgeMark::Circle)
                };
                pag.add_edge_homologous(x, y, mx, my).expect("valid window pair");
            } else if let Some(z) = find_sepset(mag, a, b) {
                let z: Vec<TimedNode> = z.into_iter().map(|i| TimedNode::from_index(i, n)).collect();
                pag.sepsets.record(x, y, &z);
            }
        }
    }
    orient(&mut pag);
    pag
}
