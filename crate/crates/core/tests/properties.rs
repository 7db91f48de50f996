//! Property tests over random graphs and random models.

mod common;

use proptest::prelude::*;
use tsicd::ci::{window_embed, CiTest, FisherZ, GSquare, OracleTest};
use tsicd::discovery::{ts_icd, DiscoveryConfig, OrderingPolicy};
use tsicd::graph::{parse_graph_text, EdgeMark, TimedNode, VarNames};
use tsicd::icd::{orient, pd_sep_range, possible_ancestors_of, pds_reachable};
use tsicd::metrics::{icd_bound, skeleton_confusion, tsicd_bound, BinomialMode};
use tsicd::separation::{d_separated, m_separated, unrolled_ground_truth};
use tsicd::svar::{binarize, sample_model, simulate, ProtocolParams};

fn small_params() -> ProtocolParams {
    ProtocolParams { n_observed: 3, tau: 1, n_extra: 3, ..ProtocolParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn separation_is_symmetric(seed in any::<u64>(), n in 3usize..=6, mask in 0u32..64) {
        let mut r = common::rng(seed);
        let dag = common::random_dag(&mut r, n, 0.5);
        let mag = common::random_mag(&mut r, n, 0.5);
        let z: Vec<usize> = (2..n).filter(|v| mask >> v & 1 == 1).collect();
        prop_assert_eq!(d_separated(&dag, 0, 1, &z).unwrap(), d_separated(&dag, 1, 0, &z).unwrap());
        prop_assert_eq!(m_separated(&mag, 0, 1, &z).unwrap(), m_separated(&mag, 1, 0, &z).unwrap());
    }

    #[test]
    fn possible_ancestors_match_path_search(seed in any::<u64>(), n in 2usize..=6) {
        let g = common::random_pag(&mut common::rng(seed), n, 0.5);
        let fast = possible_ancestors_of(&g, &[0]);
        for v in 0..n {
            prop_assert_eq!(fast[v], common::possibly_ancestral_path(&g, v, 0), "node {}", v);
        }
    }

    #[test]
    fn pds_reach_matches_path_search(seed in any::<u64>(), n in 3usize..=6, r in 1usize..=3) {
        let g = common::random_pag(&mut common::rng(seed), n, 0.6);
        let reach = pds_reachable(&g, 0, 1, r);
        for v in 2..n {
            let shortest = common::simple_paths(&g, 0, v)
                .into_iter()
                .filter(|p| !p.contains(&1) && p.len() - 1 <= r && common::is_pds_path(&g, p))
                .map(|p| p.len() - 1)
                .min();
            prop_assert_eq!(reach.get(&v).copied(), shortest, "node {}", v);
        }
    }

    #[test]
    fn pd_sep_range_sets_are_distinct_and_sized(seed in any::<u64>(), n in 3usize..=6, r in 0usize..=3) {
        let g = common::random_pag(&mut common::rng(seed), n, 0.6);
        let cands = pd_sep_range(&g, 0, 1, r);
        let mut sets: Vec<Vec<usize>> = cands.iter().map(|c| c.z_set.clone()).collect();
        for z in &sets {
            prop_assert_eq!(z.len(), r);
            prop_assert!(!z.contains(&0) && !z.contains(&1));
        }
        let before = sets.len();
        sets.dedup();
        prop_assert_eq!(sets.len(), before);
    }

    #[test]
    fn tsicd_bound_never_exceeds_icd_bound(n in 1usize..=6, tau in 0usize..=4, r in 0usize..=5, k in 1u32..=9) {
        prop_assume!(n * (tau + 1) >= r + 2);
        let icd = icd_bound(n, tau, r).unwrap() as f64;
        for mode in [BinomialMode::Rounded, BinomialMode::Gamma] {
            prop_assert!(tsicd_bound(n, tau, r, f64::from(k) / 10.0, mode).unwrap() <= icd * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_runs_are_consistent(seed in 0u64..10_000) {
        let model = sample_model(seed, &small_params()).unwrap();
        let truth = unrolled_ground_truth(&model, 1).unwrap();
        let n = model.observed_vars().len();
        let oracle = OracleTest::new(truth.mag.clone(), n).unwrap();
        let (mut g, report) = ts_icd(&DiscoveryConfig::new(n, 1), &oracle).unwrap();
        prop_assert!(g.audit().is_ok());
        prop_assert_eq!(report.ci_histogram.iter().sum::<u64>(), report.total_ci);
        prop_assert_eq!(&g.edges(), &truth.pag.edges());
        // orientation is a function of skeleton and sepsets
        let before = g.edges();
        orient(&mut g);
        prop_assert_eq!(g.edges(), before);
        let c = skeleton_confusion(&truth.pag, &g).unwrap();
        prop_assert_eq!((c.fp, c.fn_), (0, 0));
    }

    #[test]
    fn graph_text_round_trips(seed in 0u64..10_000) {
        let model = sample_model(seed, &small_params()).unwrap();
        let truth = unrolled_ground_truth(&model, 2).unwrap();
        let names = VarNames::default_for(truth.pag.n_vars());
        let parsed = parse_graph_text(&truth.pag.to_text_representatives(&names), &names, 2).unwrap();
        prop_assert_eq!(parsed.edges(), truth.pag.edges());
        let parsed = parse_graph_text(&truth.pag.to_text(&names), &names, 2).unwrap();
        prop_assert_eq!(parsed.edges(), truth.pag.edges());
    }

    #[test]
    fn statistical_tests_are_symmetric(seed in 0u64..10_000, zsel in 0usize..3) {
        let model = sample_model(seed, &small_params()).unwrap();
        let series = simulate(&model, 200, seed).unwrap();
        let real = window_embed(&series, 1).unwrap();
        let binary = window_embed(&binarize(&series), 1).unwrap();
        let (x, y) = (TimedNode::new(0, 0), TimedNode::new(1, 1));
        let z: Vec<TimedNode> = [TimedNode::new(2, 0), TimedNode::new(0, 1)].into_iter().take(zsel).collect();
        let fz = FisherZ::new(&real, 0.01);
        let gs = GSquare::new(&binary, 0.01);
        let tests: [&dyn CiTest; 2] = [&fz, &gs];
        for t in tests {
            let a = t.test(x, y, &z).unwrap();
            let b = t.test(y, x, &z).unwrap();
            prop_assert_eq!(a.independent, b.independent);
            match (a.p_value, b.p_value) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-9),
                (p, q) => prop_assert_eq!(p, q),
            }
        }
    }

    #[test]
    fn finite_sample_runs_keep_invariants(seed in 0u64..10_000, policy in 0u8..3) {
        let model = sample_model(seed, &small_params()).unwrap();
        let series = simulate(&model, 300, seed).unwrap();
        let data = window_embed(&series, 2).unwrap();
        let policy = match policy {
            0 => OrderingPolicy::DescendingLag,
            1 => OrderingPolicy::Swapped,
            _ => OrderingPolicy::Random(seed),
        };
        let n = series.n_vars();
        let (g, report) = ts_icd(&DiscoveryConfig::new(n, 2).with_policy(policy), &FisherZ::new(&data, 0.01)).unwrap();
        prop_assert!(g.audit().is_ok());
        prop_assert_eq!(report.ci_histogram.iter().sum::<u64>(), report.total_ci);
        prop_assert_eq!(report.ci_histogram[0], (n * (n - 1) / 2 + 2 * n * n) as u64);
        for (r, &c) in report.ci_histogram.iter().enumerate() {
            prop_assert!(u128::from(c) <= icd_bound(n, 2, r).unwrap());
        }
        for e in g.edges() {
            if e.is_temporal() {
                prop_assert_eq!(g.mark_at(e.b, e.a), Some(EdgeMark::Head));
            }
        }
    }
}
