//! Coefficient fields over box domains.

pub mod io;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Default points per axis for one-dimensional domains.
pub const DEFAULT_POINTS_1D: usize = 256;
/// Default points per axis when n ≥ 2.
pub const DEFAULT_POINTS_ND: usize = 64;
pub const MIN_POINTS_PER_AXIS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// An axis-aligned box with a per-axis sample count. Infinite endpoints mark
/// unbounded directions, which are sampled through an arctan stretch.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    bounds: Vec<Interval>,
    counts: Vec<usize>,
}

impl DomainBox {
    pub fn new(bounds: Vec<Interval>, counts: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Shape("domain needs at least one axis".into()));
        }
        if bounds.len() != counts.len() {
            return Err(Error::Shape(format!(
                "{} intervals but {} sample counts",
                bounds.len(),
                counts.len()
            )));
        }
        for (i, b) in bounds.iter().enumerate() {
            if b.lo.is_nan() || b.hi.is_nan() || !(b.lo < b.hi) || b.lo == f64::INFINITY || b.hi == f64::NEG_INFINITY
            {
                return Err(Error::Precondition(format!(
                    "axis {}: need a < b, got [{}, {}]",
                    i + 1,
                    b.lo,
                    b.hi
                )));
            }
        }
        if let Some(c) = counts.iter().find(|&&c| c < MIN_POINTS_PER_AXIS) {
            return Err(Error::Precondition(format!(
                "each axis needs at least {MIN_POINTS_PER_AXIS} sample points, got {c}"
            )));
        }
        Ok(DomainBox { bounds, counts })
    }

    /// Box with the default sampling density for its dimension.
    pub fn with_default_grid(bounds: Vec<Interval>) -> Result<Self> {
        let per = if bounds.len() == 1 {
            DEFAULT_POINTS_1D
        } else {
            DEFAULT_POINTS_ND
        };
        let counts = vec![per; bounds.len()];
        Self::new(bounds, counts)
    }

    pub fn uniform(bounds: Vec<Interval>, per_axis: usize) -> Result<Self> {
        let counts = vec![per_axis; bounds.len()];
        Self::new(bounds, counts)
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total_points(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds.iter().all(Interval::is_bounded)
    }

    /// Human-readable notes about approximations the sampling introduces.
    pub fn warnings(&self) -> Vec<String> {
        self.bounds
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_bounded())
            .map(|(i, _)| {
                format!(
                    "axis {} is unbounded: sampled through an arctan stretch; strictness is certified only pointwise",
                    i + 1
                )
            })
            .collect()
    }

    /// Sample coordinates along one axis, increasing.
    pub fn axis_points(&self, axis: usize) -> Result<Vec<f64>> {
        let b = self.bounds.get(axis).ok_or(Error::Index {
            index: axis,
            len: self.n(),
        })?;
        Ok(axis_samples(*b, self.counts[axis]))
    }

    /// Row-major multi-index of a flat point index (last axis fastest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for a in (0..self.n()).rev() {
            idx[a] = flat % self.counts[a];
            flat /= self.counts[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.counts).fold(0, |acc, (i, c)| acc * c + i)
    }

    /// Every sample point in row-major order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.n()).map(|a| axis_samples(self.bounds[a], self.counts[a])).collect();
        (0..self.total_points())
            .map(|f| {
                self.multi_index(f)
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| axes[a][i])
                    .collect()
            })
            .collect()
    }

    /// The box with axis `h` removed, or `None` for n = 1.
    fn without_axis(&self, h: usize) -> Option<(Vec<Interval>, Vec<usize>)> {
        (self.n() > 1).then(|| {
            let mut b = self.bounds.clone();
            let mut c = self.counts.clone();
            b.remove(h);
            c.remove(h);
            (b, c)
        })
    }
}

fn axis_samples(b: Interval, count: usize) -> Vec<f64> {
    use std::f64::consts::FRAC_PI_2;
    let mid = |j: usize| (j as f64 + 0.5) / count as f64;
    match (b.lo.is_finite(), b.hi.is_finite()) {
        (true, true) => (0..count)
            .map(|j| {
                if j + 1 == count {
                    b.hi
                } else {
                    b.lo + (b.hi - b.lo) * j as f64 / (count - 1) as f64
                }
            })
            .collect(),
        (false, false) => (0..count).map(|j| (-FRAC_PI_2 + std::f64::consts::PI * mid(j)).tan()).collect(),
        (true, false) => (0..count).map(|j| b.lo + (FRAC_PI_2 * mid(j)).tan()).collect(),
        (false, true) => (0..count).rev().map(|j| b.hi - (FRAC_PI_2 * mid(j)).tan()).collect(),
    }
}

/// Black-box coefficient evaluator returning the `n` matrices `A^h(x)`.
pub type PerHCallback = dyn Fn(&[f64]) -> Vec<CMat> + Send + Sync;

#[derive(Clone)]
pub enum FieldKind {
    ConstantPerH(Vec<CMat>),
    /// `values[point][h]`, points in the row-major order of the domain grid.
    GridPerH {
        shape: Vec<usize>,
        values: Vec<Vec<CMat>>,
    },
    /// `A^{hk}` as `tensor[h][k]`.
    ConstantTensor(Vec<Vec<CMat>>),
    Callback {
        eval: Arc<PerHCallback>,
        /// Serializes sampling when the evaluator is not reentrant.
        single_threaded: bool,
    },
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::ConstantPerH(a) => f.debug_tuple("ConstantPerH").field(a).finish(),
            FieldKind::GridPerH { shape, values } => f
                .debug_struct("GridPerH")
                .field("shape", shape)
                .field("points", &values.len())
                .finish(),
            FieldKind::ConstantTensor(t) => f.debug_tuple("ConstantTensor").field(t).finish(),
            FieldKind::Callback { single_threaded, .. } => f
                .debug_struct("Callback")
                .field("single_threaded", single_threaded)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientField {
    m: usize,
    n: usize,
    kind: FieldKind,
}

/// Matrices evaluated at one point.
#[derive(Clone, Debug, PartialEq)]
pub enum PointMatrices {
    PerH(Vec<CMat>),
    Tensor(Vec<Vec<CMat>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub x: Vec<f64>,
    pub matrices: PointMatrices,
}

fn check_square(a: &CMat, m: usize, what: &str) -> Result<()> {
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::Schema(format!(
            "{what}: expected {m}x{m}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn check_finite(a: &CMat, x: &[f64]) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvariantViolation(format!("non-finite coefficient at x = {x:?}")))
    }
}

impl CoefficientField {
    pub fn constant_per_h(mats: Vec<CMat>) -> Result<Self> {
        let n = mats.len();
        if n == 0 {
            return Err(Error::Shape("need at least one matrix A^h".into()));
        }
        let m = mats[0].nrows();
        if m == 0 {
            return Err(Error::Shape("matrices must be non-empty".into()));
        }
        for (h, a) in mats.iter().enumerate() {
            check_square(a, m, &format!("A^{}", h + 1))?;
            check_finite(a, &[])?;
        }
        Ok(CoefficientField {
            m,
            n,
            kind: FieldKind::ConstantPerH(mats),
        })
    }

    /// One constant matrix on a one-dimensional domain.
    pub fn constant(a: CMat) -> Result<Self> {
        Self::constant_per_h(vec![a])
    }

    pub fn grid_per_h(shape: Vec<usize>, values: Vec<Vec<CMat>>) -> Result<Self> {
        let n = shape.len();
        let total: usize = shape.iter().product();
        if n == 0 || values.len() != total || total == 0 {
            return Err(Error::Shape(format!(
                "grid of shape {shape:?} needs {total} points, got {}",
                values.len()
            )));
        }
        let m = values[0].first().map(|a| a.nrows()).unwrap_or(0);
        if m == 0 {
            return Err(Error::Shape("matrices must be non-empty".into()));
        }
        for (p, mats) in values.iter().enumerate() {
            if mats.len() != n {
                return Err(Error::Schema(format!("point {p}: {} matrices for n = {n}", mats.len())));
            }
            for (h, a) in mats.iter().enumerate() {
                check_square(a, m, &format!("point {p}, A^{}", h + 1))?;
                check_finite(a, &[p as f64])?;
            }
        }
        Ok(CoefficientField {
            m,
            n,
            kind: FieldKind::GridPerH { shape, values },
        })
    }

    pub fn constant_tensor(tensor: Vec<Vec<CMat>>) -> Result<Self> {
        let n = tensor.len();
        if n == 0 || tensor.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("tensor must be n x n blocks".into()));
        }
        let m = tensor[0][0].nrows();
        if m == 0 {
            return Err(Error::Shape("matrices must be non-empty".into()));
        }
        for (h, row) in tensor.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                check_square(a, m, &format!("A^{{{}{}}}", h + 1, k + 1))?;
                check_finite(a, &[])?;
            }
        }
        Ok(CoefficientField {
            m,
            n,
            kind: FieldKind::ConstantTensor(tensor),
        })
    }

    pub fn callback(
        m: usize,
        n: usize,
        eval: impl Fn(&[f64]) -> Vec<CMat> + Send + Sync + 'static,
        single_threaded: bool,
    ) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Shape("callback field needs m, n >= 1".into()));
        }
        Ok(CoefficientField {
            m,
            n,
            kind: FieldKind::Callback {
                eval: Arc::new(eval),
                single_threaded,
            },
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn is_per_h(&self) -> bool {
        !matches!(self.kind, FieldKind::ConstantTensor(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, FieldKind::ConstantPerH(_) | FieldKind::ConstantTensor(_))
    }

    /// `(points, n, m, m)` for grid fields, `(n, m, m)` for constant per-h
    /// fields and `(n, n, m, m)` for tensors.
    pub fn shape(&self) -> Vec<usize> {
        match &self.kind {
            FieldKind::ConstantPerH(_) | FieldKind::Callback { .. } => vec![self.n, self.m, self.m],
            FieldKind::GridPerH { values, .. } => vec![values.len(), self.n, self.m, self.m],
            FieldKind::ConstantTensor(_) => vec![self.n, self.n, self.m, self.m],
        }
    }

    /// The full tensor `A^{hk}` at a point, with per-h fields expanded to
    /// `δ^{hk} A^h`.
    pub fn as_tensor(mats: &PointMatrices, m: usize) -> Vec<Vec<CMat>> {
        match mats {
            PointMatrices::Tensor(t) => t.clone(),
            PointMatrices::PerH(a) => {
                let n = a.len();
                (0..n)
                    .map(|h| {
                        (0..n)
                            .map(|k| if h == k { a[h].clone() } else { CMat::zeros(m, m) })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    fn check_domain(&self, domain: &DomainBox) -> Result<()> {
        if domain.n() != self.n {
            return Err(Error::Shape(format!(
                "field has n = {} but the domain has {} axes",
                self.n,
                domain.n()
            )));
        }
        if let FieldKind::GridPerH { shape, .. } = &self.kind {
            if shape.as_slice() != domain.counts() {
                return Err(Error::Shape(format!(
                    "grid shape {shape:?} does not match domain sampling {:?}",
                    domain.counts()
                )));
            }
        }
        Ok(())
    }

    /// Matrices at the grid point with flat index `index` and coordinates `x`.
    pub fn eval_point(&self, index: usize, x: &[f64]) -> Result<PointMatrices> {
        match &self.kind {
            FieldKind::ConstantPerH(a) => Ok(PointMatrices::PerH(a.clone())),
            FieldKind::ConstantTensor(t) => Ok(PointMatrices::Tensor(t.clone())),
            FieldKind::GridPerH { values, .. } => values.get(index).cloned().map(PointMatrices::PerH).ok_or(Error::Index {
                index,
                len: values.len(),
            }),
            FieldKind::Callback { eval, .. } => {
                let mats = eval(x);
                if mats.len() != self.n {
                    return Err(Error::Shape(format!(
                        "callback returned {} matrices at x = {x:?}, expected {}",
                        mats.len(),
                        self.n
                    )));
                }
                for a in &mats {
                    if a.nrows() != self.m || a.ncols() != self.m {
                        return Err(Error::Shape(format!(
                            "callback returned a {}x{} matrix at x = {x:?}, expected {}x{}",
                            a.nrows(),
                            a.ncols(),
                            self.m,
                            self.m
                        )));
                    }
                    check_finite(a, x)?;
                }
                Ok(PointMatrices::PerH(mats))
            }
        }
    }

    fn parallel_ok(&self) -> bool {
        !matches!(self.kind, FieldKind::Callback { single_threaded: true, .. })
    }

    /// Maps `f` over every sample point, in parallel when the field allows it.
    /// Results keep the row-major point order.
    pub fn map_samples<T: Send>(
        &self,
        domain: &DomainBox,
        f: impl Fn(Sample) -> Result<T> + Sync + Send,
    ) -> Result<Vec<T>> {
        self.check_domain(domain)?;
        let points = domain.points();
        if points.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let run = |(i, x): (usize, Vec<f64>)| -> Result<T> {
            let matrices = self.eval_point(i, &x)?;
            f(Sample { index: i, x, matrices })
        };
        if self.parallel_ok() {
            points.into_par_iter().enumerate().map(run).collect()
        } else {
            points.into_iter().enumerate().map(run).collect()
        }
    }

    /// Restriction of `A^h` to the line through `y` along axis `h` (0-based).
    /// `y` holds the other n − 1 coordinates in axis order.
    pub fn slice(&self, domain: &DomainBox, h: usize, y: &[f64]) -> Result<Slice> {
        self.check_domain(domain)?;
        if h >= self.n {
            return Err(Error::Index { index: h, len: self.n });
        }
        if y.len() + 1 != self.n {
            return Err(Error::Shape(format!("slice needs {} coordinates, got {}", self.n - 1, y.len())));
        }
        let line = domain.bounds()[h];
        let line_box = DomainBox::new(vec![line], vec![domain.counts()[h]])?;
        let others = domain.without_axis(h);
        if let Some((bounds, _)) = &others {
            if bounds.iter().zip(y).any(|(b, &v)| !b.contains(v)) {
                return Ok(Slice::Empty);
            }
        }
        let field = match &self.kind {
            FieldKind::ConstantPerH(a) => CoefficientField::constant(a[h].clone())?,
            FieldKind::ConstantTensor(_) => {
                return Err(Error::Precondition("slices are defined for per-h fields only".into()));
            }
            FieldKind::GridPerH { values, .. } => {
                let mut idx = Vec::with_capacity(self.n);
                let mut yi = 0;
                for a in 0..self.n {
                    if a == h {
                        idx.push(0);
                        continue;
                    }
                    let pts = domain.axis_points(a)?;
                    let pos = pts.iter().position(|&p| (p - y[yi]).abs() <= 1e-12 * p.abs().max(1.0));
                    let Some(pos) = pos else {
                        return Err(Error::Precondition(format!(
                            "slice coordinate {} on axis {} is not a grid point",
                            y[yi],
                            a + 1
                        )));
                    };
                    idx.push(pos);
                    yi += 1;
                }
                let count = domain.counts()[h];
                let vals = (0..count)
                    .map(|j| {
                        idx[h] = j;
                        vec![values[domain.flat_index(&idx)][h].clone()]
                    })
                    .collect();
                CoefficientField::grid_per_h(vec![count], vals)?
            }
            FieldKind::Callback { eval, single_threaded } => {
                let eval = Arc::clone(eval);
                let y = y.to_vec();
                let n = self.n;
                CoefficientField::callback(
                    self.m,
                    1,
                    move |t: &[f64]| {
                        let mut x = y.clone();
                        x.insert(h, t[0]);
                        let mats = eval(&x);
                        if mats.len() == n {
                            vec![mats[h].clone()]
                        } else {
                            mats
                        }
                    },
                    *single_threaded,
                )?
            }
        };
        Ok(Slice::Line { field, domain: line_box })
    }
}

/// A one-dimensional restriction, or the marker for a void slice set.
#[derive(Clone, Debug)]
pub enum Slice {
    Empty,
    Line { field: CoefficientField, domain: DomainBox },
}

/// Every sample of `field` over `domain` in row-major order.
pub fn sample_field(field: &CoefficientField, domain: &DomainBox) -> Result<Vec<Sample>> {
    field.map_samples(domain, Ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0))
    }

    fn unit(n: usize, count: usize) -> DomainBox {
        DomainBox::uniform(vec![Interval::new(0.0, 1.0); n], count).unwrap()
    }

    #[test]
    fn box_invariants() {
        assert!(DomainBox::new(vec![Interval::new(1.0, 0.0)], vec![4]).is_err());
        assert!(DomainBox::new(vec![Interval::new(0.0, 1.0)], vec![2]).is_err());
        let d = DomainBox::with_default_grid(vec![Interval::new(0.0, 1.0)]).unwrap();
        assert_eq!(d.total_points(), 256);
        let d = DomainBox::with_default_grid(vec![Interval::new(0.0, 1.0); 2]).unwrap();
        assert_eq!(d.counts(), &[64, 64]);
    }

    #[test]
    fn unbounded_axes_are_stretched_and_flagged() {
        let d = DomainBox::uniform(vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)], 5).unwrap();
        let p = d.axis_points(0).unwrap();
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!(p[2].abs() < 1e-15);
        assert!(!d.warnings().is_empty());
        let d = DomainBox::uniform(vec![Interval::new(2.0, f64::INFINITY)], 4).unwrap();
        let p = d.axis_points(0).unwrap();
        assert!(p[0] > 2.0 && p.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn callback_samples_in_row_major_order() {
        let f = CoefficientField::callback(2, 1, |x| vec![diag(&[1.0, 1.0 + x[0] * x[0]])], false).unwrap();
        let s = sample_field(&f, &unit(1, 3)).unwrap();
        let want = [1.0, 1.25, 2.0];
        for (smp, w) in s.iter().zip(want) {
            assert_eq!(smp.matrices, PointMatrices::PerH(vec![diag(&[1.0, w])]));
        }
    }

    #[test]
    fn callback_wrong_shape_reports_point() {
        let f = CoefficientField::callback(2, 1, |_| vec![diag(&[1.0])], true).unwrap();
        let e = sample_field(&f, &unit(1, 3)).unwrap_err();
        assert!(matches!(e, Error::Shape(msg) if msg.contains("x = [0.0]")));
    }

    #[test]
    fn slices() {
        let f = CoefficientField::callback(2, 2, |x| vec![diag(&[1.0, 1.0 + x[1] * x[1]]); 2], false).unwrap();
        let d = unit(2, 3);
        let Slice::Line { field, domain } = f.slice(&d, 0, &[1.0]).unwrap() else {
            panic!("expected a line");
        };
        for s in sample_field(&field, &domain).unwrap() {
            assert_eq!(s.matrices, PointMatrices::PerH(vec![diag(&[1.0, 2.0])]));
        }
        assert!(matches!(f.slice(&d, 0, &[3.0]).unwrap(), Slice::Empty));
        assert!(matches!(f.slice(&d, 5, &[0.0]), Err(Error::Index { .. })));
    }

    #[test]
    fn slice_sample_commute_on_grid() {
        let d = unit(2, 3);
        let pts = d.points();
        let values: Vec<Vec<CMat>> = pts.iter().map(|x| vec![diag(&[x[0], x[1]]), diag(&[x[1] + 1.0, 2.0])]).collect();
        let f = CoefficientField::grid_per_h(vec![3, 3], values).unwrap();
        let all = sample_field(&f, &d).unwrap();
        for h in 0..2 {
            for &y in &d.axis_points(1 - h).unwrap() {
                let Slice::Line { field, domain } = f.slice(&d, h, &[y]).unwrap() else {
                    panic!()
                };
                for s in sample_field(&field, &domain).unwrap() {
                    let mut x = vec![y];
                    x.insert(h, s.x[0]);
                    let full = all.iter().find(|a| a.x == x).unwrap();
                    let PointMatrices::PerH(ref mats) = full.matrices else { panic!() };
                    assert_eq!(s.matrices, PointMatrices::PerH(vec![mats[h].clone()]));
                }
            }
        }
    }

    #[test]
    fn grid_shape_mismatch() {
        let f = CoefficientField::grid_per_h(vec![4], vec![vec![diag(&[1.0])]; 4]).unwrap();
        assert_eq!(f.shape(), vec![4, 1, 1, 1]);
        assert!(sample_field(&f, &unit(1, 5)).is_err());
        assert_eq!(sample_field(&f, &unit(1, 4)).unwrap().len(), 4);
    }
}
