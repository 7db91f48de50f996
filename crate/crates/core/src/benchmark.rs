//! Repeated sample/simulate/discover/score runs over seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ci::{window_embed, CiTest, FisherZ, GSquare, OracleTest, DEFAULT_ALPHA};
use crate::discovery::{ts_icd, DiscoveryConfig, OrderingPolicy, OrientSchedule};
use crate::metrics::{causal_accuracy, median_mad, skeleton_confusion, Confusion};
use crate::separation::unrolled_ground_truth;
use crate::svar::{binarize, sample_model, simulate, ProtocolParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    /// Fisher-z partial correlation.
    ParCorr,
    /// G-square on categorical data.
    GSquare,
    /// m-separation in the window MAG.
    Oracle,
}

impl std::str::FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parcorr" => Ok(TestKind::ParCorr),
            "gsq" => Ok(TestKind::GSquare),
            "oracle" => Ok(TestKind::Oracle),
            other => Err(Error::param(format!("unknown test {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub params: ProtocolParams,
    /// Series length before windowing.
    pub t: usize,
    /// Largest lag of the discovery window.
    pub w: usize,
    pub seeds: Vec<u64>,
    pub binary: bool,
    pub test: TestKind,
    pub alpha: f64,
    pub policies: Vec<OrderingPolicy>,
    pub orient: OrientSchedule,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            params: ProtocolParams::default(),
            t: 500,
            w: 3,
            seeds: (0..100).collect(),
            binary: false,
            test: TestKind::ParCorr,
            alpha: DEFAULT_ALPHA,
            policies: vec![OrderingPolicy::DescendingLag],
            orient: OrientSchedule::default(),
        }
    }
}

/// Scores of one discovery run against the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub policy: OrderingPolicy,
    pub confusion: Confusion,
    pub f1: f64,
    pub causal_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub total_ci: u64,
    pub ci_histogram: Vec<u64>,
    pub conflicts: usize,
    pub runtime_secs: f64,
}

/// Median and mean absolute deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub mad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: OrderingPolicy,
    pub reps: usize,
    pub f1: Spread,
    pub causal_accuracy: Spread,
    pub precision: Spread,
    pub recall: Spread,
    pub fpr: Spread,
    pub fnr: Spread,
    pub total_ci: Spread,
}

/// Short label used in reports.
pub fn policy_label(p: OrderingPolicy) -> String {
    match p {
        OrderingPolicy::DescendingLag => "ts-icd".into(),
        OrderingPolicy::Swapped => "swapped".into(),
        OrderingPolicy::Random(s) => format!("random({s})"),
    }
}

/// Noise seed used for the series of repetition `seed`, decorrelated from
/// the structure seed.
pub fn simulation_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
}

/// One repetition: all policies share the model and the data.
pub fn run_rep(cfg: &BenchmarkConfig, seed: u64) -> Result<Vec<RunRecord>> {
    let model = sample_model(seed, &cfg.params)?;
    let truth = unrolled_ground_truth(&model, cfg.w)?;
    let n = model.observed_vars().len();
    let data = match cfg.test {
        TestKind::Oracle => None,
        _ => {
            let raw = simulate(&model, cfg.t, simulation_seed(seed))?;
            let raw = if cfg.binary || cfg.test == TestKind::GSquare { binarize(&raw) } else { raw };
            Some(window_embed(&raw, cfg.w)?)
        }
    };
    let test: Box<dyn CiTest + '_> = match (cfg.test, &data) {
        (TestKind::Oracle, _) => Box::new(OracleTest::new(truth.mag.clone(), n)?),
        (TestKind::ParCorr, Some(d)) => Box::new(FisherZ::new(d, cfg.alpha)),
        (TestKind::GSquare, Some(d)) => Box::new(GSquare::new(d, cfg.alpha)),
        _ => unreachable!("data exists for statistical tests"),
    };
    let mut out = Vec::with_capacity(cfg.policies.len());
    for &policy in &cfg.policies {
        let dc = DiscoveryConfig {
            alpha: cfg.alpha,
            orient: cfg.orient,
            ..DiscoveryConfig::new(n, cfg.w).with_policy(policy)
        };
        let (learned, report) = ts_icd(&dc, &*test)?;
        let c = skeleton_confusion(&truth.pag, &learned)?;
        out.push(RunRecord {
            seed,
            policy,
            confusion: c,
            f1: c.f1(),
            causal_accuracy: causal_accuracy(&truth.pag, &learned)?,
            precision: c.precision(),
            recall: c.recall(),
            fpr: c.fpr(),
            fnr: c.fnr(),
            total_ci: report.total_ci,
            ci_histogram: report.ci_histogram,
            conflicts: report.conflicts.len(),
            runtime_secs: report.runtime_secs,
        });
    }
    Ok(out)
}

/// Runs every seed in parallel. Records are ordered by seed, then policy.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<(Vec<RunRecord>, Vec<PolicySummary>)> {
    if cfg.policies.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::param("need at least one seed and one policy"));
    }
    let per_seed: Vec<Vec<RunRecord>> = cfg.seeds.par_iter().map(|&s| run_rep(cfg, s)).collect::<Result<_>>()?;
    let records: Vec<RunRecord> = per_seed.into_iter().flatten().collect();
    let summaries = cfg.policies.iter().map(|&p| summarize(&records, p)).collect::<Result<_>>()?;
    Ok((records, summaries))
}

pub fn summarize(records: &[RunRecord], policy: OrderingPolicy) -> Result<PolicySummary> {
    let rs: Vec<&RunRecord> = records.iter().filter(|r| r.policy == policy).collect();
    let spread = |f: &dyn Fn(&RunRecord) -> f64| -> Result<Spread> {
        let v: Vec<f64> = rs.iter().map(|r| f(r)).collect();
        let (median, mad) = median_mad(&v)?;
        Ok(Spread { median, mad })
    };
    Ok(PolicySummary {
        policy,
        reps: rs.len(),
        f1: spread(&|r| r.f1)?,
        causal_accuracy: spread(&|r| r.causal_accuracy)?,
        precision: spread(&|r| r.precision)?,
        recall: spread(&|r| r.recall)?,
        fpr: spread(&|r| r.fpr)?,
        fnr: spread(&|r| r.fnr)?,
        total_ci: spread(&|r| r.total_ci as f64)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_rep_is_perfect() {
        let cfg = BenchmarkConfig {
            params: ProtocolParams { n_observed: 3, tau: 1, n_extra: 3, ..ProtocolParams::default() },
            w: 1,
            seeds: vec![1, 2],
            test: TestKind::Oracle,
            ..BenchmarkConfig::default()
        };
        let (records, summary) = run_benchmark(&cfg).unwrap();
        assert_eq!(records.len(), 2);
        for r in &records {
            assert_eq!(r.f1, 1.0);
            assert_eq!(r.causal_accuracy, 1.0);
        }
        assert_eq!(summary[0].reps, 2);
    }

    #[test]
    fn test_kind_parsing() {
        assert_eq!("gsq".parse::<TestKind>().unwrap(), TestKind::GSquare);
        assert!("kci".parse::<TestKind>().is_err());
    }
}
