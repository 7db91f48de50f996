//! Random stationary linear SVAR models: sampling, simulation, binarization
//! and a plain-text model format.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ci::{Column, Series};
use crate::graph::Dag;
use crate::separation::{unrolled_ground_truth, DynamicGroundTruth};
use crate::{Error, Result};

/// Steps simulated and discarded before recording.
pub const BURN_IN: usize = 200;

/// `source(t - lag) -> target(t)` with `lag >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub source: usize,
    pub lag: usize,
    pub target: usize,
    pub coef: f64,
}

/// `source(t) -> target(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContemporaneousEdge {
    pub source: usize,
    pub target: usize,
    pub coef: f64,
}

/// Linear structural VAR process with Gaussian noise and hidden variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvarModel {
    n_total: usize,
    latent: Vec<usize>,
    tau: usize,
    temporal: Vec<TemporalEdge>,
    contemporaneous: Vec<ContemporaneousEdge>,
    noise_scale: Vec<f64>,
    /// Topological order of the contemporaneous DAG.
    order: Vec<usize>,
}

impl SvarModel {
    /// Builds and validates a model. Noise scales default to 1.
    pub fn new(
        n_total: usize,
        latent: Vec<usize>,
        tau: usize,
        temporal: Vec<TemporalEdge>,
        contemporaneous: Vec<ContemporaneousEdge>,
    ) -> Result<Self> {
        let mut latent = latent;
        latent.sort_unstable();
        latent.dedup();
        if tau == 0 {
            return Err(Error::param("model order must be at least 1"));
        }
        if latent.iter().any(|&v| v >= n_total) {
            return Err(Error::param("latent index out of range"));
        }
        for e in &temporal {
            if e.source >= n_total || e.target >= n_total || e.lag == 0 || e.lag > tau {
                return Err(Error::param(format!(
                    "bad temporal edge {}(t-{}) -> {}",
                    e.source, e.lag, e.target
                )));
            }
        }
        let mut dag = Dag::new(n_total);
        for e in &contemporaneous {
            if e.source >= n_total || e.target >= n_total {
                return Err(Error::param("contemporaneous edge out of range"));
            }
            dag.add_edge(e.source, e.target)?;
        }
        let order = topological_order(&dag);
        Ok(SvarModel {
            n_total,
            latent,
            tau,
            temporal,
            contemporaneous,
            noise_scale: vec![1.0; n_total],
            order,
        })
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn latent(&self) -> &[usize] {
        &self.latent
    }

    pub fn is_latent(&self, v: usize) -> bool {
        self.latent.binary_search(&v).is_ok()
    }

    /// Observed variables in increasing index order; observed variable `i`
    /// of a simulated table is `observed_vars()[i]`.
    pub fn observed_vars(&self) -> Vec<usize> {
        (0..self.n_total).filter(|&v| !self.is_latent(v)).collect()
    }

    pub fn temporal(&self) -> &[TemporalEdge] {
        &self.temporal
    }

    pub fn contemporaneous(&self) -> &[ContemporaneousEdge] {
        &self.contemporaneous
    }

    pub fn noise_scale(&self) -> &[f64] {
        &self.noise_scale
    }

    /// Unrolled DAG over lags `0..=depth`, node `lag * n_total + var`.
    /// Latent variables and every node older than `w` are marked latent.
    pub fn unroll(&self, depth: usize, w: usize) -> Result<Dag> {
        let nt = self.n_total;
        let mut dag = Dag::new(nt * (depth + 1));
        for lag in 0..=depth {
            for e in &self.contemporaneous {
                dag.add_edge(lag * nt + e.source, lag * nt + e.target)?;
            }
            for e in &self.temporal {
                if lag + e.lag <= depth {
                    dag.add_edge((lag + e.lag) * nt + e.source, lag * nt + e.target)?;
                }
            }
            for v in 0..nt {
                dag.set_latent(lag * nt + v, lag > w || self.is_latent(v));
            }
        }
        Ok(dag)
    }

    /// Spectral radius of the companion matrix of the reduced form.
    pub fn spectral_radius(&self) -> f64 {
        let nt = self.n_total;
        let mut a0 = DMatrix::<f64>::zeros(nt, nt);
        for e in &self.contemporaneous {
            a0[(e.target, e.source)] += e.coef;
        }
        let inv = (DMatrix::<f64>::identity(nt, nt) - a0)
            .try_inverse()
            .expect("I - A0 is unit triangular up to permutation");
        let dim = nt * self.tau;
        let mut comp = DMatrix::<f64>::zeros(dim, dim);
        for k in 1..=self.tau {
            let mut ak = DMatrix::<f64>::zeros(nt, nt);
            for e in self.temporal.iter().filter(|e| e.lag == k) {
                ak[(e.target, e.source)] += e.coef;
            }
            let bk = &inv * ak;
            comp.view_mut((0, (k - 1) * nt), (nt, nt)).copy_from(&bk);
        }
        for i in nt..dim {
            comp[(i, i - nt)] = 1.0;
        }
        comp.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_stationary(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Plain-text description, one directive per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n_total {}", self.n_total);
        let _ = writeln!(s, "tau {}", self.tau);
        let latent: Vec<String> = self.latent.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "latent {}", latent.join(" "));
        let noise: Vec<String> = self.noise_scale.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "noise {}", noise.join(" "));
        for e in &self.contemporaneous {
            let _ = writeln!(s, "contemporaneous {} {} {}", e.source, e.target, e.coef);
        }
        for e in &self.temporal {
            let _ = writeln!(s, "temporal {} {} {} {}", e.source, e.lag, e.target, e.coef);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_total = None;
        let mut tau = None;
        let mut latent = Vec::new();
        let mut noise = None;
        let mut temporal = Vec::new();
        let mut contemporaneous = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            let Some((&key, rest)) = toks.split_first() else { continue };
            if key.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line, msg };
            let us = |t: &str| t.parse::<usize>().map_err(|e| perr(format!("{t:?}: {e}")));
            let fl = |t: &str| t.parse::<f64>().map_err(|e| perr(format!("{t:?}: {e}")));
            let arity = |k: usize| {
                if rest.len() == k {
                    Ok(())
                } else {
                    Err(perr(format!("{key} expects {k} fields")))
                }
            };
            match key {
                "n_total" => {
                    arity(1)?;
                    n_total = Some(us(rest[0])?);
                }
                "tau" => {
                    arity(1)?;
                    tau = Some(us(rest[0])?);
                }
                "latent" => latent = rest.iter().map(|t| us(t)).collect::<Result<_>>()?,
                "noise" => noise = Some(rest.iter().map(|t| fl(t)).collect::<Result<Vec<f64>>>()?),
                "contemporaneous" => {
                    arity(3)?;
                    contemporaneous.push(ContemporaneousEdge {
                        source: us(rest[0])?,
                        target: us(rest[1])?,
                        coef: fl(rest[2])?,
                    });
                }
                "temporal" => {
                    arity(4)?;
                    temporal.push(TemporalEdge {
                        source: us(rest[0])?,
                        lag: us(rest[1])?,
                        target: us(rest[2])?,
                        coef: fl(rest[3])?,
                    });
                }
                other => return Err(perr(format!("unknown directive {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing {k}") };
        let n_total = n_total.ok_or_else(|| missing("n_total"))?;
        let tau = tau.ok_or_else(|| missing("tau"))?;
        let mut model = SvarModel::new(n_total, latent, tau, temporal, contemporaneous)?;
        if let Some(noise) = noise {
            if noise.len() != n_total {
                return Err(Error::Parse { line: 0, msg: "noise needs one scale per variable".into() });
            }
            model.noise_scale = noise;
        }
        Ok(model)
    }
}

fn topological_order(dag: &Dag) -> Vec<usize> {
    let n = dag.n_nodes();
    let mut indeg: Vec<usize> = (0..n).map(|v| dag.parents(v).len()).collect();
    let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        out.push(v);
        for &c in dag.children(v) {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(c);
            }
        }
    }
    out
}

/// Knobs of the random model generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n_observed: usize,
    /// Fraction of all variables that are hidden.
    pub latent_frac: f64,
    pub tau: usize,
    /// Cross relations added on top of the lag-1 self loops.
    pub n_extra: usize,
    /// Share of the extra relations that are contemporaneous.
    pub contemporaneous_frac: f64,
    pub auto_range: (f64, f64),
    pub coef_range: (f64, f64),
    pub max_retries: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        ProtocolParams {
            n_observed: 5,
            latent_frac: 0.3,
            tau: 3,
            n_extra: 5,
            contemporaneous_frac: 0.3,
            auto_range: (0.6, 0.9),
            coef_range: (0.2, 0.8),
            max_retries: 1000,
        }
    }
}

impl ProtocolParams {
    /// Smallest total count whose latent share still leaves `n_observed`
    /// observed variables.
    pub fn n_total(&self) -> usize {
        (self.n_observed..)
            .find(|&nt| nt - self.n_latent_of(nt) >= self.n_observed)
            .expect("latent_frac < 1")
    }

    pub fn n_latent(&self) -> usize {
        self.n_latent_of(self.n_total())
    }

    fn n_latent_of(&self, nt: usize) -> usize {
        ((self.latent_frac * nt as f64) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn n_contemporaneous(&self) -> usize {
        (self.contemporaneous_frac * self.n_extra as f64 + 1e-9).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n_observed < 1 {
            return Err(Error::param("need at least one observed variable"));
        }
        if !(0.0..1.0).contains(&self.latent_frac) {
            return Err(Error::param("latent_frac must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.contemporaneous_frac) {
            return Err(Error::param("contemporaneous_frac must lie in [0, 1]"));
        }
        if self.tau == 0 {
            return Err(Error::param("tau must be at least 1"));
        }
        let (lo, hi) = self.auto_range;
        let (clo, chi) = self.coef_range;
        if !(lo <= hi && clo <= chi && clo >= 0.0) {
            return Err(Error::param("coefficient ranges must be ordered and non-negative"));
        }
        let nt = self.n_total();
        let pairs = nt * (nt - 1) / 2;
        let lagged = nt * (nt - 1) * self.tau;
        if self.n_contemporaneous() > pairs || self.n_extra - self.n_contemporaneous() > lagged {
            return Err(Error::param("more extra relations than available variable pairs"));
        }
        Ok(())
    }
}

/// Samples a stationary model. The structure is drawn once; coefficients
/// are redrawn until the process is stationary or the retry budget runs out.
pub fn sample_model(seed: u64, params: &ProtocolParams) -> Result<SvarModel> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = params.n_total();
    let mut latent = rand::seq::index::sample(&mut rng, nt, params.n_latent()).into_vec();
    latent.sort_unstable();

    let mut order: Vec<usize> = (0..nt).collect();
    order.shuffle(&mut rng);

    let n_cont = params.n_contemporaneous();
    let mut cont_pairs: Vec<(usize, usize)> = Vec::new();
    while cont_pairs.len() < n_cont {
        let i = rng.random_range(0..nt);
        let j = rng.random_range(0..nt);
        if i == j {
            continue;
        }
        let (i, j) = (i.min(j), i.max(j));
        let pair = (order[i], order[j]);
        if !cont_pairs.contains(&pair) {
            cont_pairs.push(pair);
        }
    }
    let mut lag_triples: Vec<(usize, usize, usize)> = Vec::new();
    while lag_triples.len() < params.n_extra - n_cont {
        let s = rng.random_range(0..nt);
        let t = rng.random_range(0..nt);
        let lag = rng.random_range(1..=params.tau);
        if s != t && !lag_triples.contains(&(s, lag, t)) {
            lag_triples.push((s, lag, t));
        }
    }

    for _ in 0..params.max_retries {
        let cross = |rng: &mut ChaCha8Rng| {
            let m = rng.random_range(params.coef_range.0..=params.coef_range.1);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        };
        let mut temporal: Vec<TemporalEdge> = (0..nt)
            .map(|v| TemporalEdge {
                source: v,
                lag: 1,
                target: v,
                coef: rng.random_range(params.auto_range.0..=params.auto_range.1),
            })
            .collect();
        for &(source, lag, target) in &lag_triples {
            temporal.push(TemporalEdge { source, lag, target, coef: cross(&mut rng) });
        }
        let contemporaneous: Vec<ContemporaneousEdge> = cont_pairs
            .iter()
            .map(|&(source, target)| ContemporaneousEdge { source, target, coef: cross(&mut rng) })
            .collect();
        let model = SvarModel::new(nt, latent.clone(), params.tau, temporal, contemporaneous)?;
        if model.is_stationary() {
            return Ok(model);
        }
    }
    Err(Error::NotStationary(params.max_retries))
}

/// `t` samples of the observed variables after [`BURN_IN`] discarded steps.
pub fn simulate(model: &SvarModel, t: usize, seed: u64) -> Result<Series> {
    if t == 0 {
        return Err(Error::param("series length must be at least 1"));
    }
    let nt = model.n_total;
    let tau = model.tau;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parents_t: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nt];
    for e in &model.temporal {
        parents_t[e.target].push((e.source, e.lag, e.coef));
    }
    let mut parents_c: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nt];
    for e in &model.contemporaneous {
        parents_c[e.target].push((e.source, e.coef));
    }
    // ring buffer of the last tau + 1 states; slot (step % (tau+1))
    let slots = tau + 1;
    let mut hist = vec![0.0f64; slots * nt];
    let observed = model.observed_vars();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(t); observed.len()];
    for step in 0..(BURN_IN + t) {
        let cur = step % slots;
        for &v in &model.order {
            let mut x = model.noise_scale[v] * rng.sample::<f64, _>(StandardNormal);
            for &(src, lag, coef) in &parents_t[v] {
                if step >= lag {
                    x += coef * hist[((step - lag) % slots) * nt + src];
                }
            }
            for &(src, coef) in &parents_c[v] {
                x += coef * hist[cur * nt + src];
            }
            hist[cur * nt + v] = x;
        }
        if step >= BURN_IN {
            for (col, &v) in cols.iter_mut().zip(&observed) {
                col.push(hist[cur * nt + v]);
            }
        }
    }
    let names = (0..observed.len()).map(|i| format!("X{i}")).collect();
    Series::new(names, cols.into_iter().map(Column::Real).collect())
}

/// Midpoint median of a non-empty slice.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Thresholds each real column at its median: strictly above is 1, else 0.
/// Categorical columns pass through unchanged.
pub fn binarize(series: &Series) -> Series {
    let cols = series
        .columns()
        .iter()
        .map(|c| match c {
            Column::Real(v) => {
                let m = median(v);
                Column::Categorical(v.iter().map(|&x| u32::from(x > m)).collect())
            }
            Column::Categorical(v) => Column::Categorical(v.clone()),
        })
        .collect();
    Series::new(series.names().to_vec(), cols).expect("same shape as input")
}

/// Window ground truth of `model` (MAG and completed PAG over lags `0..=w`).
pub fn export_ground_truth(model: &SvarModel, w: usize) -> Result<DynamicGroundTruth> {
    unrolled_ground_truth(model, w)
}
