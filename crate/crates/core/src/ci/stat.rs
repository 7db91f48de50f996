use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::{CiNote, CiRecord, CiTest, Column, Dataset};
use crate::graph::TimedNode;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartialCorrMethod {
    /// Correlation of least-squares residuals on an intercept plus `z`.
    #[default]
    Residuals,
    /// From the inverse of the sample covariance of `(x, y, z)`.
    Precision,
}

/// Fisher-z statistic and two-sided p-value for partial correlation `r`
/// estimated from `t` samples with `k` conditioning variables.
pub fn fisher_z(r: f64, t: usize, k: usize) -> Result<(f64, f64)> {
    if t <= k + 3 {
        return Err(Error::InsufficientSamples { samples: t, cond: k });
    }
    let stat = ((t - k - 3) as f64).sqrt() * r.clamp(-1.0, 1.0).atanh().abs();
    let p = erfc(stat / std::f64::consts::SQRT_2);
    Ok((stat, p.clamp(0.0, 1.0)))
}

/// `(G, df, p)` for a contingency table given per stratum as row-major
/// counts with `kx` rows and `ky` columns. Empty rows and columns of a
/// stratum do not contribute degrees of freedom.
pub fn g_square(strata: &[Vec<u64>], kx: usize, ky: usize) -> (f64, usize, f64) {
    let mut g = 0.0;
    let mut df = 0usize;
    for table in strata {
        let mut rows = vec![0u64; kx];
        let mut cols = vec![0u64; ky];
        for i in 0..kx {
            for j in 0..ky {
                rows[i] += table[i * ky + j];
                cols[j] += table[i * ky + j];
            }
        }
        let total: u64 = rows.iter().sum();
        if total == 0 {
            continue;
        }
        let nr = rows.iter().filter(|&&c| c > 0).count();
        let nc = cols.iter().filter(|&&c| c > 0).count();
        df += nr.saturating_sub(1) * nc.saturating_sub(1);
        for i in 0..kx {
            for j in 0..ky {
                let o = table[i * ky + j];
                if o > 0 {
                    let e = rows[i] as f64 * cols[j] as f64 / total as f64;
                    g += o as f64 * (o as f64 / e).ln();
                }
            }
        }
    }
    let g = (2.0 * g).max(0.0);
    let p = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").sf(g)
    };
    (g, df, p)
}

fn real_column(data: &Dataset, v: TimedNode) -> Result<Vec<f64>> {
    Ok(match data.column(v)? {
        Column::Real(c) => c.clone(),
        Column::Categorical(c) => c.iter().map(|&x| x as f64).collect(),
    })
}

fn check_query(x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<()> {
    if x == y || z.contains(&x) || z.contains(&y) {
        return Err(Error::param("query endpoints must be distinct and outside the conditioning set"));
    }
    Ok(())
}

/// Partial-correlation test for real-valued data.
#[derive(Debug, Clone)]
pub struct FisherZ<'a> {
    data: &'a Dataset,
    alpha: f64,
    method: PartialCorrMethod,
}

impl<'a> FisherZ<'a> {
    pub fn new(data: &'a Dataset, alpha: f64) -> Self {
        FisherZ { data, alpha, method: PartialCorrMethod::Residuals }
    }

    pub fn with_method(mut self, method: PartialCorrMethod) -> Self {
        self.method = method;
        self
    }

    /// Partial correlation of `x` and `y` given `z`; `None` when the
    /// conditioning columns are singular.
    pub fn partial_correlation(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<Option<f64>> {
        let t = self.data.n_rows();
        let xs = DVector::from_vec(real_column(self.data, x)?);
        let ys = DVector::from_vec(real_column(self.data, y)?);
        let mut cond = DMatrix::<f64>::from_element(t, z.len() + 1, 1.0);
        for (k, &v) in z.iter().enumerate() {
            cond.set_column(k + 1, &DVector::from_vec(real_column(self.data, v)?));
        }
        match self.method {
            PartialCorrMethod::Residuals => Ok(residual_corr(&xs, &ys, cond)),
            PartialCorrMethod::Precision => Ok(precision_corr(&xs, &ys, &cond)),
        }
    }
}

fn residual_corr(xs: &DVector<f64>, ys: &DVector<f64>, cond: DMatrix<f64>) -> Option<f64> {
    let scale = cond.norm().max(1.0);
    let qr = cond.qr();
    let r = qr.r();
    if r.diagonal().iter().any(|d| d.abs() <= 1e-10 * scale) {
        return None;
    }
    let q = qr.q();
    let rx = xs - &q * (q.transpose() * xs);
    let ry = ys - &q * (q.transpose() * ys);
    let (nx, ny) = (rx.norm(), ry.norm());
    let tiny = 1e-12 * (xs.norm() + ys.norm()).max(1.0);
    if nx <= tiny || ny <= tiny {
        // a column fully explained by the conditioning set carries no
        // further information
        return Some(0.0);
    }
    Some((rx.dot(&ry) / (nx * ny)).clamp(-1.0, 1.0))
}

fn precision_corr(xs: &DVector<f64>, ys: &DVector<f64>, cond: &DMatrix<f64>) -> Option<f64> {
    let t = xs.len();
    let k = cond.ncols() - 1;
    let mut m = DMatrix::<f64>::zeros(t, k + 2);
    m.set_column(0, xs);
    m.set_column(1, ys);
    for j in 0..k {
        m.set_column(j + 2, &cond.column(j + 1));
    }
    let means = m.row_mean();
    for mut row in m.row_iter_mut() {
        row -= &means;
    }
    let cov = m.transpose() * &m;
    let p = cov.try_inverse()?;
    let denom = (p[(0, 0)] * p[(1, 1)]).sqrt();
    if !denom.is_finite() || denom <= 0.0 {
        return None;
    }
    Some((-p[(0, 1)] / denom).clamp(-1.0, 1.0))
}

impl CiTest for FisherZ<'_> {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        check_query(x, y, z)?;
        let t = self.data.n_rows();
        if t <= z.len() + 3 {
            return Err(Error::InsufficientSamples { samples: t, cond: z.len() });
        }
        let (p, note) = match self.partial_correlation(x, y, z)? {
            Some(r) => (fisher_z(r, t, z.len())?.1, None),
            None => (0.0, Some(CiNote::SingularConditioning)),
        };
        Ok(CiRecord { x, y, z: z.to_vec(), p_value: Some(p), independent: p > self.alpha, note })
    }
}

/// Likelihood-ratio test for categorical data.
#[derive(Debug, Clone)]
pub struct GSquare<'a> {
    data: &'a Dataset,
    alpha: f64,
    /// Rows required per nominal degree of freedom before the test is run.
    min_rows_per_df: f64,
}

impl<'a> GSquare<'a> {
    pub const DEFAULT_MIN_ROWS_PER_DF: f64 = 10.0;

    pub fn new(data: &'a Dataset, alpha: f64) -> Self {
        GSquare { data, alpha, min_rows_per_df: Self::DEFAULT_MIN_ROWS_PER_DF }
    }

    pub fn with_min_rows_per_df(mut self, k: f64) -> Self {
        self.min_rows_per_df = k;
        self
    }

    fn codes(&self, v: TimedNode) -> Result<&[u32]> {
        match self.data.column(v)? {
            Column::Categorical(c) => Ok(c),
            Column::Real(_) => Err(Error::TypeMismatch(format!("G-square needs categorical data, {v} is real"))),
        }
    }

    /// `(G, df, p)` together with the nominal degrees of freedom.
    pub fn statistic(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<(f64, usize, f64, f64)> {
        let cx = self.codes(x)?;
        let cy = self.codes(y)?;
        let cz: Vec<&[u32]> = z.iter().map(|&v| self.codes(v)).collect::<Result<_>>()?;
        let kx = self.data.levels(x).max(1) as usize;
        let ky = self.data.levels(y).max(1) as usize;
        let kz: Vec<u64> = z.iter().map(|&v| u64::from(self.data.levels(v).max(1))).collect();
        let nominal = (kx as f64 - 1.0) * (ky as f64 - 1.0) * kz.iter().map(|&k| k as f64).product::<f64>();
        let mut strata: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
        let mut key = vec![0u32; z.len()];
        for row in 0..self.data.n_rows() {
            for (k, c) in cz.iter().enumerate() {
                key[k] = c[row];
            }
            let table = strata.entry(key.clone()).or_insert_with(|| vec![0; kx * ky]);
            table[cx[row] as usize * ky + cy[row] as usize] += 1;
        }
        let tables: Vec<Vec<u64>> = strata.into_values().collect();
        let (g, df, p) = g_square(&tables, kx, ky);
        Ok((g, df, p, nominal))
    }
}

impl CiTest for GSquare<'_> {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        check_query(x, y, z)?;
        let (_, df, p, nominal) = self.statistic(x, y, z)?;
        let rows = self.data.n_rows() as f64;
        let (p, note) = if rows < self.min_rows_per_df * nominal {
            (1.0, Some(CiNote::TooFewSamples))
        } else if df == 0 {
            (1.0, Some(CiNote::ZeroDf))
        } else {
            (p, None)
        };
        Ok(CiRecord { x, y, z: z.to_vec(), p_value: Some(p), independent: p > self.alpha, note })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{window_embed, Series};
    use approx::assert_abs_diff_eq;

    fn t(v: usize) -> TimedNode {
        TimedNode::new(v, 0)
    }

    fn dataset(cols: Vec<Column>) -> Dataset {
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        window_embed(&Series::new(names, cols).unwrap(), 0).unwrap()
    }

    #[test]
    fn fisher_reference_value() {
        let (stat, p) = fisher_z(0.5, 30, 0).unwrap();
        assert_abs_diff_eq!(stat, 0.5f64.atanh() * 27f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(stat, 2.854, epsilon = 1e-3);
        assert_abs_diff_eq!(p, 0.0043, epsilon = 1e-4);
        assert!(fisher_z(0.1, 3, 0).is_err());
        assert_eq!(fisher_z(0.0, 100, 0).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn identical_columns_are_dependent() {
        let v: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        let d = dataset(vec![Column::Real(v.clone()), Column::Real(v)]);
        for m in [PartialCorrMethod::Residuals, PartialCorrMethod::Precision] {
            let r = FisherZ::new(&d, 0.01).with_method(m).test(t(0), t(1), &[]).unwrap();
            assert!(!r.independent);
            assert!(r.p_value.unwrap() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_columns_are_independent() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let y: Vec<f64> = (0..100).map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let d = dataset(vec![Column::Real(x), Column::Real(y)]);
        let r = FisherZ::new(&d, 0.01).test(t(0), t(1), &[]).unwrap();
        assert_abs_diff_eq!(r.p_value.unwrap(), 1.0, epsilon = 1e-12);
        assert!(r.independent);
    }

    #[test]
    fn singular_conditioning_flags_dependence() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let z = vec![3.0; 50];
        let d = dataset(vec![Column::Real(x), Column::Real(y), Column::Real(z)]);
        let r = FisherZ::new(&d, 0.01).test(t(0), t(1), &[t(2)]).unwrap();
        assert_eq!(r.note, Some(CiNote::SingularConditioning));
        assert_eq!(r.p_value, Some(0.0));
        assert!(!r.independent);
    }

    #[test]
    fn methods_agree() {
        let x: Vec<f64> = (0..80).map(|i| (i as f64 * 0.7).sin()).collect();
        let z: Vec<f64> = (0..80).map(|i| (i as f64 * 0.3).cos()).collect();
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.5 * a + b + (a * 13.0).sin() * 0.2).collect();
        let d = dataset(vec![Column::Real(x), Column::Real(y), Column::Real(z)]);
        let a = FisherZ::new(&d, 0.01).partial_correlation(t(0), t(1), &[t(2)]).unwrap().unwrap();
        let b = FisherZ::new(&d, 0.01)
            .with_method(PartialCorrMethod::Precision)
            .partial_correlation(t(0), t(1), &[t(2)])
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn g_square_reference_table() {
        let (g, df, p) = g_square(&[vec![10, 20, 20, 10]], 2, 2);
        let hand = 2.0 * (2.0 * 10.0 * (10.0f64 / 15.0).ln() + 2.0 * 20.0 * (20.0f64 / 15.0).ln());
        assert_abs_diff_eq!(g, hand, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 6.796, epsilon = 1e-3);
        assert_eq!(df, 1);
        assert_abs_diff_eq!(p, 0.0091, epsilon = 1e-3);

        let (g, _, p) = g_square(&[vec![10, 20, 5, 10]], 2, 2);
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);

        // empty stratum and a stratum with a single row level
        let (_, df, p) = g_square(&[vec![0, 0, 0, 0], vec![3, 4, 0, 0]], 2, 2);
        assert_eq!(df, 0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn g_square_on_data() {
        let x: Vec<u32> = (0..400).map(|i| (i % 2) as u32).collect();
        let y: Vec<u32> = (0..400).map(|i| ((i / 2) % 2) as u32).collect();
        let dep: Vec<u32> = x.clone();
        let d = dataset(vec![Column::Categorical(x), Column::Categorical(y), Column::Categorical(dep)]);
        let g = GSquare::new(&d, 0.01);
        assert!(g.test(t(0), t(1), &[]).unwrap().independent);
        assert!(!g.test(t(0), t(2), &[]).unwrap().independent);
        assert!(g.test(t(0), t(2), &[t(1)]).unwrap().p_value.unwrap() < 0.01);
        let strict = GSquare::new(&d, 0.01).with_min_rows_per_df(1000.0);
        let r = strict.test(t(0), t(2), &[]).unwrap();
        assert_eq!(r.note, Some(CiNote::TooFewSamples));
        assert!(r.independent);

        let real = dataset(vec![Column::Real(vec![0.5; 10]), Column::Real(vec![0.5; 10])]);
        assert!(matches!(GSquare::new(&real, 0.01).test(t(0), t(1), &[]), Err(Error::TypeMismatch(_))));
    }
}
