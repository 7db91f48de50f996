//! Skeleton and orientation scores, CI-count bounds and summary statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::graph::{DynamicPag, EdgeMark, TimedNode};
use crate::{Error, Result};

/// Adjacency confusion counts over homology representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

type MarkPair = (EdgeMark, EdgeMark);

fn representatives(g: &DynamicPag) -> BTreeMap<(TimedNode, TimedNode), MarkPair> {
    g.minimal_edge_set().into_iter().map(|e| ((e.a, e.b), (e.mark_at_a, e.mark_at_b))).collect()
}

fn check_same_universe(truth: &DynamicPag, learned: &DynamicPag) -> Result<()> {
    if truth.n_vars() != learned.n_vars() || truth.window() != learned.window() {
        return Err(Error::param(format!(
            "graphs differ in shape: {} vars / lag {} vs {} vars / lag {}",
            truth.n_vars(),
            truth.window(),
            learned.n_vars(),
            learned.window()
        )));
    }
    Ok(())
}

/// Number of representative pairs: `C(n, 2) + w n^2`.
pub fn pair_universe(n: usize, w: usize) -> u64 {
    (n * n.saturating_sub(1) / 2 + w * n * n) as u64
}

pub fn skeleton_confusion(truth: &DynamicPag, learned: &DynamicPag) -> Result<Confusion> {
    check_same_universe(truth, learned)?;
    let t = representatives(truth);
    let l = representatives(learned);
    let tp = t.keys().filter(|k| l.contains_key(k)).count() as u64;
    let fp = l.len() as u64 - tp;
    let fn_ = t.len() as u64 - tp;
    let tn = pair_universe(truth.n_vars(), truth.window()) - tp - fp - fn_;
    Ok(Confusion { tp, fp, fn_, tn })
}

impl Confusion {
    /// `2TP / (2TP + FP + FN)`; 1 when both graphs are edgeless.
    pub fn f1(&self) -> f64 {
        let d = 2 * self.tp + self.fp + self.fn_;
        if d == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / d as f64
        }
    }

    /// 1 when nothing was learned.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp, 1.0)
    }

    /// 1 when the truth is edgeless.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_, 1.0)
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn, 0.0)
    }

    pub fn fnr(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tp, 0.0)
    }
}

fn ratio(num: u64, den: u64, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

/// Share of truth edges present in `learned` with both marks equal. An
/// edgeless truth scores 1 against an edgeless graph and 0 otherwise.
pub fn causal_accuracy(truth: &DynamicPag, learned: &DynamicPag) -> Result<f64> {
    check_same_universe(truth, learned)?;
    let t = representatives(truth);
    let l = representatives(learned);
    if t.is_empty() {
        return Ok(if l.is_empty() { 1.0 } else { 0.0 });
    }
    let hits = t.iter().filter(|(k, m)| l.get(k) == Some(m)).count();
    Ok(hits as f64 / t.len() as f64)
}

fn binom_u128(k: u64, r: u64) -> Option<u128> {
    if r > k {
        return Some(0);
    }
    let r = r.min(k - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // exact at every step: acc * (k - i) is divisible by i + 1
        acc = acc.checked_mul(u128::from(k - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Worst-case number of tests at conditioning size `r` for a window of
/// `tau + 1` stamps without homology: `(tau+1) n^2 C((tau+1) n - 2, r)`.
pub fn icd_bound(n: usize, tau: usize, r: usize) -> Result<u128> {
    let nodes = (tau + 1) * n;
    if nodes < 2 || r > nodes - 2 {
        return Err(Error::param(format!("r = {r} outside 0..={}", nodes.saturating_sub(2))));
    }
    let c = binom_u128((nodes - 2) as u64, r as u64).ok_or_else(|| Error::param("bound overflows"))?;
    ((tau + 1) as u128 * (n * n) as u128)
        .checked_mul(c)
        .ok_or_else(|| Error::param("bound overflows"))
}

/// How `C(k, r)` is evaluated for the non-integer `k` of [`tsicd_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BinomialMode {
    /// Round `l rho n` to the nearest integer.
    #[default]
    Rounded,
    /// Real-valued `Gamma(k+1) / (Gamma(r+1) Gamma(k-r+1))`.
    Gamma,
}

/// Worst-case tests at size `r` when the fraction `rho` of edges survives
/// per lag: `n^2 sum_l C((tau+1-l) n + l rho n - 2, r)`.
pub fn tsicd_bound(n: usize, tau: usize, r: usize, rho: f64, mode: BinomialMode) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::param(format!("rho = {rho} outside (0, 1)")));
    }
    let n2 = (n * n) as f64;
    let mut total = 0.0;
    for l in 0..=tau {
        let base = ((tau + 1 - l) * n) as f64;
        let extra = l as f64 * rho * n as f64;
        let term = match mode {
            BinomialMode::Rounded => {
                let k = base + extra.round() - 2.0;
                if k < 0.0 {
                    0.0
                } else {
                    binom_f64(k as u64, r as u64)
                }
            }
            BinomialMode::Gamma => gamma_binom(base + extra - 2.0, r as f64),
        };
        total += term;
    }
    Ok(n2 * total)
}

fn binom_f64(k: u64, r: u64) -> f64 {
    if r > k {
        return 0.0;
    }
    let r = r.min(k - r);
    (0..r).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64)
}

fn gamma_binom(k: f64, r: f64) -> f64 {
    if k < r || k < 0.0 {
        return 0.0;
    }
    (ln_gamma(k + 1.0) - ln_gamma(r + 1.0) - ln_gamma(k - r + 1.0)).exp()
}

/// Midpoint median and mean absolute deviation from it.
pub fn median_mad(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::param("median of an empty list"));
    }
    let m = crate::svar::median(values);
    let mad = values.iter().map(|v| (v - m).abs()).sum::<f64>() / values.len() as f64;
    Ok((m, mad))
}
