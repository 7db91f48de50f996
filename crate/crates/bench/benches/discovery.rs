use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tsicd::ci::{window_embed, FisherZ, OracleTest};
use tsicd::discovery::{ts_icd, DiscoveryConfig, OrderingPolicy};
use tsicd::icd::pd_sep_range;
use tsicd::separation::unrolled_ground_truth;
use tsicd::svar::{sample_model, simulate, ProtocolParams};

const POLICIES: [(&str, OrderingPolicy); 3] = [
    ("descending", OrderingPolicy::DescendingLag),
    ("swapped", OrderingPolicy::Swapped),
    ("random", OrderingPolicy::Random(0)),
];

fn oracle(c: &mut Criterion) {
    let params = ProtocolParams { n_observed: 4, tau: 2, ..ProtocolParams::default() };
    let model = sample_model(3, &params).unwrap();
    let truth = unrolled_ground_truth(&model, 2).unwrap();
    let test = OracleTest::new(truth.mag, 4).unwrap();
    let mut group = c.benchmark_group("ts_icd_oracle");
    for (name, policy) in POLICIES {
        let cfg = DiscoveryConfig::new(4, 2).with_policy(policy);
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| ts_icd(black_box(&cfg), &test).unwrap()));
    }
    group.finish();
}

fn parcorr(c: &mut Criterion) {
    let mut group = c.benchmark_group("ts_icd_parcorr");
    group.sample_size(20);
    for t in [500usize, 2000] {
        let model = sample_model(0, &ProtocolParams::default()).unwrap();
        let series = simulate(&model, t, 1).unwrap();
        let data = window_embed(&series, 3).unwrap();
        let test = FisherZ::new(&data, 0.01);
        let cfg = DiscoveryConfig::new(series.n_vars(), 3);
        group.bench_with_input(BenchmarkId::new("t", t), &cfg, |b, cfg| b.iter(|| ts_icd(cfg, &test).unwrap()));
    }
    group.finish();
}

fn ground_truth(c: &mut Criterion) {
    let model = sample_model(0, &ProtocolParams::default()).unwrap();
    c.bench_function("unrolled_ground_truth", |b| b.iter(|| unrolled_ground_truth(black_box(&model), 3).unwrap()));
}

fn candidate_sets(c: &mut Criterion) {
    let model = sample_model(0, &ProtocolParams::default()).unwrap();
    let pag = unrolled_ground_truth(&model, 3).unwrap().pag;
    let g = pag.graph();
    c.bench_function("pd_sep_range_r2", |b| {
        b.iter(|| {
            let mut total = 0;
            for (a, v) in g.edges() {
                total += pd_sep_range(g, a, v, 2).len();
            }
            total
        })
    });
}

criterion_group!(benches, oracle, parcorr, ground_truth, candidate_sets);
criterion_main!(benches);
