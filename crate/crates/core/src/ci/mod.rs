//! Conditional-independence tests over windowed time series.

mod stat;
mod wrap;

use serde::{Deserialize, Serialize};

use crate::graph::{Mag, TimedNode};
use crate::separation::m_connected;
use crate::{Error, Result};

pub use stat::{fisher_z, g_square, FisherZ, GSquare, PartialCorrMethod};
pub use wrap::{CachedTest, CountingTest};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Real(Vec<f64>),
    /// Level codes `0..k`.
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Real(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slice(&self, from: usize, to: usize) -> Column {
        match self {
            Column::Real(v) => Column::Real(v[from..to].to_vec()),
            Column::Categorical(v) => Column::Categorical(v[from..to].to_vec()),
        }
    }
}

/// Raw multivariate series: one column per variable, rows in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    names: Vec<String>,
    columns: Vec<Column>,
}

impl Series {
    pub fn new(names: Vec<String>, columns: Vec<Column>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::param("one name per column required"));
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::param("columns differ in length"));
            }
        }
        Ok(Series { names, columns })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_categorical(&self) -> bool {
        self.columns.iter().all(|c| matches!(c, Column::Categorical(_)))
    }

    /// Reinterprets real columns holding only non-negative integers as
    /// categorical codes.
    pub fn to_categorical(&self) -> Result<Series> {
        let mut cols = Vec::with_capacity(self.columns.len());
        for (name, c) in self.names.iter().zip(&self.columns) {
            cols.push(match c {
                Column::Categorical(v) => Column::Categorical(v.clone()),
                Column::Real(v) => {
                    let codes: Option<Vec<u32>> = v
                        .iter()
                        .map(|&x| {
                            (x.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&x)).then_some(x as u32)
                        })
                        .collect();
                    Column::Categorical(codes.ok_or_else(|| {
                        Error::TypeMismatch(format!("column {name:?} is not integer-valued"))
                    })?)
                }
            });
        }
        Series::new(self.names.clone(), cols)
    }
}

/// Windowed samples: column `lag * n + var` holds `var` observed `lag` steps
/// before the row's time index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    w: usize,
    rows: usize,
    columns: Vec<Column>,
    levels: Vec<u32>,
}

impl Dataset {
    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> usize {
        self.w
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, v: TimedNode) -> Result<&Column> {
        if v.var >= self.n || v.lag > self.w {
            return Err(Error::NodeOutOfRange { node: v.index(self.n.max(1)), size: self.columns.len() });
        }
        Ok(&self.columns[v.index(self.n)])
    }

    /// Number of categorical levels (largest code plus one); 0 for real columns.
    pub fn levels(&self, v: TimedNode) -> u32 {
        self.levels[v.index(self.n)]
    }
}

/// Embeds a series of length `T` into `T - w` rows of `n (w + 1)` columns.
pub fn window_embed(series: &Series, w: usize) -> Result<Dataset> {
    let t = series.len();
    if t <= w {
        return Err(Error::SeriesTooShort { len: t, window: w });
    }
    let n = series.n_vars();
    let rows = t - w;
    let mut columns = Vec::with_capacity(n * (w + 1));
    for lag in 0..=w {
        for c in series.columns() {
            columns.push(c.slice(w - lag, t - lag));
        }
    }
    let levels = columns
        .iter()
        .map(|c| match c {
            Column::Real(_) => 0,
            Column::Categorical(v) => v.iter().copied().max().map_or(0, |m| m + 1),
        })
        .collect();
    Ok(Dataset { n, w, rows, columns, levels })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CiNote {
    /// Conditioning columns are linearly dependent; reported as dependence.
    SingularConditioning,
    /// Too few rows per degree of freedom; reported as independence.
    TooFewSamples,
    /// Every stratum was degenerate.
    ZeroDf,
}

/// Outcome of one conditional-independence query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRecord {
    pub x: TimedNode,
    pub y: TimedNode,
    pub z: Vec<TimedNode>,
    /// Absent for the graphical oracle.
    pub p_value: Option<f64>,
    pub independent: bool,
    pub note: Option<CiNote>,
}

/// A conditional-independence test over window nodes.
pub trait CiTest: Send + Sync {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord>;
}

impl<T: CiTest + ?Sized> CiTest for &T {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        (**self).test(x, y, z)
    }
}

impl<T: CiTest + ?Sized> CiTest for Box<T> {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        (**self).test(x, y, z)
    }
}

/// Perfect test answering by m-separation in a window MAG whose node
/// `lag * n + var` is `TimedNode { var, lag }`.
#[derive(Debug, Clone)]
pub struct OracleTest {
    mag: Mag,
    n: usize,
}

impl OracleTest {
    pub fn new(mag: Mag, n: usize) -> Result<Self> {
        if n == 0 || !mag.n_nodes().is_multiple_of(n) {
            return Err(Error::param("MAG size is not a whole number of time-stamps"));
        }
        Ok(OracleTest { mag, n })
    }

    fn idx(&self, v: TimedNode) -> Result<usize> {
        let i = v.index(self.n);
        if v.var >= self.n || i >= self.mag.n_nodes() {
            return Err(Error::NodeOutOfRange { node: i, size: self.mag.n_nodes() });
        }
        Ok(i)
    }
}

impl CiTest for OracleTest {
    fn test(&self, x: TimedNode, y: TimedNode, z: &[TimedNode]) -> Result<CiRecord> {
        let (a, b) = (self.idx(x)?, self.idx(y)?);
        let zi: Vec<usize> = z.iter().map(|&v| self.idx(v)).collect::<Result<_>>()?;
        if a == b || zi.contains(&a) || zi.contains(&b) {
            return Err(Error::param("query endpoints must be distinct and outside the conditioning set"));
        }
        Ok(CiRecord {
            x,
            y,
            z: z.to_vec(),
            p_value: None,
            independent: !m_connected(&self.mag, a, b, &zi),
            note: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeMark, MixedGraph};

    fn real(names: &[&str], cols: Vec<Vec<f64>>) -> Series {
        Series::new(names.iter().map(|s| s.to_string()).collect(), cols.into_iter().map(Column::Real).collect())
            .unwrap()
    }

    #[test]
    fn embed_shifts_columns() {
        let s = real(&["a"], vec![vec![5.0, 6.0, 7.0]]);
        let d = window_embed(&s, 1).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.column(TimedNode::new(0, 0)).unwrap(), &Column::Real(vec![6.0, 7.0]));
        assert_eq!(d.column(TimedNode::new(0, 1)).unwrap(), &Column::Real(vec![5.0, 6.0]));

        let d0 = window_embed(&s, 0).unwrap();
        assert_eq!(d0.column(TimedNode::new(0, 0)).unwrap(), &s.columns()[0]);
        assert!(matches!(window_embed(&s, 3), Err(Error::SeriesTooShort { .. })));
        assert!(d.column(TimedNode::new(0, 2)).is_err());
    }

    #[test]
    fn categorical_conversion() {
        let s = real(&["a"], vec![vec![0.0, 1.0, 2.0]]);
        let c = s.to_categorical().unwrap();
        assert_eq!(c.columns()[0], Column::Categorical(vec![0, 1, 2]));
        assert!(c.is_categorical());
        let bad = real(&["a"], vec![vec![0.5]]);
        assert!(matches!(bad.to_categorical(), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn oracle_examples() {
        let t = |v| TimedNode::new(v, 0);
        let mut g = MixedGraph::new(3);
        g.add_edge(0, 1, EdgeMark::Head, EdgeMark::Head);
        g.add_edge(1, 2, EdgeMark::Tail, EdgeMark::Head);
        let o = OracleTest::new(Mag::new(g).unwrap(), 3).unwrap();
        assert!(!o.test(t(0), t(1), &[]).unwrap().independent);
        assert!(!o.test(t(0), t(2), &[]).unwrap().independent);
        assert!(o.test(t(0), t(2), &[t(1)]).unwrap().independent);
        let mut g = MixedGraph::new(3);
        g.add_edge(0, 1, EdgeMark::Tail, EdgeMark::Head);
        g.add_edge(1, 2, EdgeMark::Tail, EdgeMark::Head);
        let o = OracleTest::new(Mag::new(g).unwrap(), 3).unwrap();
        let r = o.test(t(0), t(2), &[t(1)]).unwrap();
        assert!(r.independent);
        assert_eq!(r.p_value, None);
        assert!(o.test(t(0), t(5), &[]).is_err());
    }
}
