//! The TS-ICD main loop with pluggable edge orderings.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ci::{CachedTest, CiTest, CountingTest, DEFAULT_ALPHA};
use crate::graph::{DynamicPag, TimedNode};
use crate::icd::{orient, pd_sep_range, MarkConflict};
use crate::{Error, Result};

/// Order in which the edges of one iteration are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OrderingPolicy {
    /// Temporal edges by decreasing lag, then contemporaneous edges.
    #[default]
    DescendingLag,
    /// Contemporaneous edges first, then temporal edges by increasing lag.
    Swapped,
    /// One sweep over all edges in seeded random order.
    Random(u64),
}

/// When the orientation rules are rerun during discovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OrientSchedule {
    /// Once every edge has been visited at the current conditioning size.
    #[default]
    PerIteration,
    /// After every sweep, so a temporal sweep may see marks derived from a
    /// half-finished iteration.
    PerSweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    pub n: usize,
    /// Largest lag in the window.
    pub w: usize,
    pub policy: OrderingPolicy,
    /// Significance level the test was built with; informational.
    pub alpha: f64,
    /// Largest conditioning-set size; defaults to `n (w + 1) - 2`.
    pub max_r: Option<usize>,
    /// Memoize test results. Counts still include repeated queries.
    pub cache: bool,
    pub orient: OrientSchedule,
}

impl DiscoveryConfig {
    pub fn new(n: usize, w: usize) -> Self {
        DiscoveryConfig {
            n,
            w,
            policy: OrderingPolicy::default(),
            alpha: DEFAULT_ALPHA,
            max_r: None,
            cache: false,
            orient: OrientSchedule::default(),
        }
    }

    pub fn with_policy(mut self, policy: OrderingPolicy) -> Self {
        self.policy = policy;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("need at least two variables"));
        }
        if self.w < 1 {
            return Err(Error::param("window must contain at least one lag"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn r_limit(&self) -> usize {
        let auto = self.n * (self.w + 1) - 2;
        self.max_r.map_or(auto, |m| m.min(auto))
    }
}

/// Counters and log of one discovery run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `ci_histogram[k]`: tests run with a conditioning set of size `k`.
    pub ci_histogram: Vec<u64>,
    pub total_ci: u64,
    /// Conditioning sizes visited (`0..iterations`).
    pub iterations: usize,
    /// Homology classes left after each iteration.
    pub edges_after_iteration: Vec<usize>,
    /// Orientation conflicts of the final graph.
    pub conflicts: Vec<MarkConflict>,
    pub runtime_secs: f64,
}

/// Fully connected window graph with fixed heads at the later end of every
/// temporal edge.
pub fn initialize(n: usize, w: usize) -> Result<DynamicPag> {
    if n < 2 || w < 1 {
        return Err(Error::param(format!("need n >= 2 and w >= 1, got n = {n}, w = {w}")));
    }
    Ok(DynamicPag::complete(n, w))
}

/// Representative temporal edges `(earlier, later)` with the later node at lag 0.
fn temporal_edges(g: &DynamicPag) -> Vec<(TimedNode, TimedNode)> {
    g.minimal_edge_set().into_iter().filter(|e| e.is_temporal()).map(|e| (e.a, e.b)).collect()
}

fn contemporaneous_edges(g: &DynamicPag) -> Vec<(TimedNode, TimedNode)> {
    g.minimal_edge_set()
        .into_iter()
        .filter(|e| !e.is_temporal() && e.a.lag == 0)
        .map(|e| (e.a, e.b))
        .collect()
}

/// Sorted by lag, ties by `(earlier var, later var)`.
fn sort_temporal(edges: &mut [(TimedNode, TimedNode)], descending: bool) {
    edges.sort_by_key(|&(a, b)| (a.lag, a.var, b.var));
    if descending {
        edges.sort_by_key(|&(a, _)| std::cmp::Reverse(a.lag));
    }
}

/// One sweep over `edges` at conditioning size `r`, optionally followed by
/// reorientation. Returns whether no edge had a candidate conditioning set,
/// and the conflicts of the reorientation if one ran.
pub fn refine_homology(
    edges: &[(TimedNode, TimedNode)],
    g: &mut DynamicPag,
    r: usize,
    test: &dyn CiTest,
    reorient: bool,
) -> Result<(bool, Option<Vec<MarkConflict>>)> {
    let mut done = true;
    for &(x, y) in edges {
        if !g.is_adjacent(x, y) {
            continue;
        }
        let cands = pd_sep_range(g.graph(), g.index(x), g.index(y), r);
        if cands.is_empty() {
            continue;
        }
        done = false;
        for c in cands {
            let z: Vec<TimedNode> = c.z_set.iter().map(|&i| g.node(i)).collect();
            if test.test(x, y, &z)?.independent {
                g.remove_edge_homologous(x, y, true)?;
                g.sepsets.record(x, y, &z);
                break;
            }
        }
    }
    let conflicts = reorient.then(|| orient(g));
    Ok((done, conflicts))
}

/// Runs TS-ICD with `test` over the window described by `config`.
pub fn ts_icd(config: &DiscoveryConfig, test: &dyn CiTest) -> Result<(DynamicPag, RunReport)> {
    config.validate()?;
    let start = Instant::now();
    let cached;
    let inner: &dyn CiTest = if config.cache {
        cached = CachedTest::new(test);
        &cached
    } else {
        test
    };
    let counter = CountingTest::new(inner);
    let mut g = initialize(config.n, config.w)?;
    let mut rng = match config.policy {
        OrderingPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut report = RunReport::default();
    let mut conflicts = Vec::new();
    let limit = config.r_limit();
    let per_sweep = config.orient == OrientSchedule::PerSweep;
    let mut r = 0;
    while r <= limit {
        let mut sweep = |edges: Vec<(TimedNode, TimedNode)>, g: &mut DynamicPag| -> Result<bool> {
            let (done, c) = refine_homology(&edges, g, r, &counter, per_sweep)?;
            if let Some(c) = c {
                conflicts = c;
            }
            Ok(done)
        };
        let done = match config.policy {
            OrderingPolicy::DescendingLag => {
                let mut t = temporal_edges(&g);
                sort_temporal(&mut t, true);
                let dt = sweep(t, &mut g)?;
                let dc = sweep(contemporaneous_edges(&g), &mut g)?;
                dt && dc
            }
            OrderingPolicy::Swapped => {
                let dc = sweep(contemporaneous_edges(&g), &mut g)?;
                let mut t = temporal_edges(&g);
                sort_temporal(&mut t, false);
                let dt = sweep(t, &mut g)?;
                dt && dc
            }
            OrderingPolicy::Random(_) => {
                let mut all = temporal_edges(&g);
                all.extend(contemporaneous_edges(&g));
                all.shuffle(rng.as_mut().expect("seeded for random policy"));
                sweep(all, &mut g)?
            }
        };
        if !per_sweep {
            conflicts = orient(&mut g);
        }
        report.edges_after_iteration.push(g.minimal_edge_set().len());
        r += 1;
        if done {
            break;
        }
    }
    report.iterations = r;
    report.ci_histogram = counter.histogram();
    report.total_ci = counter.total();
    report.conflicts = conflicts;
    report.runtime_secs = start.elapsed().as_secs_f64();
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{CiRecord, OracleTest};
    use crate::graph::{EdgeMark, Mag, MixedGraph};

    struct Never;

    impl CiTest for Never {
        fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
            Ok(CiRecord { x, y, z: z.to_vec(), p_value: Some(0.0), independent: false, note: None })
        }
    }

    struct Always;

    impl CiTest for Always {
        fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
            Ok(CiRecord { x, y, z: z.to_vec(), p_value: Some(1.0), independent: true, note: None })
        }
    }

    #[test]
    fn initialize_sizes() {
        let g = initialize(2, 1).unwrap();
        assert_eq!(g.n_nodes(), 4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.minimal_edge_set().len(), 5);
        assert!(initialize(1, 1).is_err());
        assert!(initialize(2, 0).is_err());
    }

    #[test]
    fn edge_orders() {
        let g = initialize(2, 2).unwrap();
        let mut t = temporal_edges(&g);
        sort_temporal(&mut t, true);
        let lags: Vec<usize> = t.iter().map(|(a, _)| a.lag).collect();
        assert_eq!(lags, vec![2, 2, 2, 2, 1, 1, 1, 1]);
        assert_eq!(t[0], (TimedNode::new(0, 2), TimedNode::new(0, 0)));
        assert_eq!(t[1], (TimedNode::new(0, 2), TimedNode::new(1, 0)));
        sort_temporal(&mut t, false);
        assert_eq!(t[0].0.lag, 1);
        assert_eq!(contemporaneous_edges(&g), vec![(TimedNode::new(0, 0), TimedNode::new(1, 0))]);
    }

    #[test]
    fn empty_sweep_is_done() {
        let mut g = initialize(2, 1).unwrap();
        let before = g.clone();
        let (done, _) = refine_homology(&[], &mut g, 0, &Never, true).unwrap();
        assert!(done);
        assert_eq!(g, before);
    }

    #[test]
    fn marginal_count_for_three_variables() {
        let cfg = DiscoveryConfig::new(3, 2);
        let (g, rep) = ts_icd(&cfg, &Never).unwrap();
        assert_eq!(rep.ci_histogram[0], 21);
        assert_eq!(g.minimal_edge_set().len(), 21);
        assert_eq!(rep.total_ci, rep.ci_histogram.iter().sum::<u64>());
    }

    #[test]
    fn independent_everything_stops_after_one_round() {
        for policy in [OrderingPolicy::DescendingLag, OrderingPolicy::Swapped, OrderingPolicy::Random(4)] {
            let cfg = DiscoveryConfig::new(3, 2).with_policy(policy);
            let (g, rep) = ts_icd(&cfg, &Always).unwrap();
            assert_eq!(g.edge_count(), 0);
            assert_eq!(rep.iterations, 2);
            assert_eq!(rep.ci_histogram, vec![21]);
        }
    }

    #[test]
    fn oracle_on_contemporaneous_chain() {
        // window MAG of X0 -> X1 -> X2 replicated at both lags of w = 1
        let n = 3;
        let mut m = MixedGraph::new(6);
        for lag in 0..2 {
            m.add_edge(lag * n, lag * n + 1, EdgeMark::Tail, EdgeMark::Head);
            m.add_edge(lag * n + 1, lag * n + 2, EdgeMark::Tail, EdgeMark::Head);
        }
        let oracle = OracleTest::new(Mag::new(m).unwrap(), n).unwrap();
        let (g, _) = ts_icd(&DiscoveryConfig::new(n, 1), &oracle).unwrap();
        let reps = g.minimal_edge_set();
        assert_eq!(reps.len(), 2);
        assert!(reps.iter().all(|e| e.mark_at_a == EdgeMark::Circle && e.mark_at_b == EdgeMark::Circle));
        assert!(g.sepsets.get(TimedNode::new(0, 0), TimedNode::new(2, 0)).unwrap() == vec![TimedNode::new(1, 0)]);
    }

    #[test]
    fn caching_keeps_counts() {
        let cfg = DiscoveryConfig { cache: true, ..DiscoveryConfig::new(3, 2) };
        let (_, rep) = ts_icd(&cfg, &Never).unwrap();
        let (_, plain) = ts_icd(&DiscoveryConfig::new(3, 2), &Never).unwrap();
        assert_eq!(rep.ci_histogram, plain.ci_histogram);
    }
}
