//! Compactly supported C¹ vector fields with closed-form gradients.
//!
//! Every test function lives on a reference box with coordinates `t` and is
//! placed in space by the axis-wise affine map `x_a = origin_a + scale_a t_a`.
//! Quadrature runs in reference coordinates so that very long or very thin
//! supports keep full precision.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Interval;
use crate::linalg::{CVec, C64};

/// `1` on `|x| ≤ 1/2`, `0` on `|x| ≥ 1`, joined by the quintic smoothstep.
pub fn cutoff(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let u = 2.0 * a - 1.0;
        1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

pub fn cutoff_deriv(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 || a >= 1.0 {
        0.0
    } else {
        let u = 2.0 * a - 1.0;
        -2.0 * 30.0 * u * u * (1.0 - u) * (1.0 - u) * x.signum()
    }
}

/// The cubic ramp `x²(3 − 2x)` clamped to `[0, 1]`.
pub fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * (3.0 - 2.0 * x)
    }
}

pub fn ramp_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        6.0 * x * (1.0 - x)
    }
}

/// One monomial `c Π ξ_a^{p_a}` of a polynomial bump.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpTerm {
    pub coeff: CVec,
    pub powers: Vec<u32>,
}

/// `Π_a (ξ_a (1 − ξ_a))² · Σ_terms c Π ξ^p` on a box, with `ξ` the box
/// coordinates rescaled to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialBump {
    pub support: Vec<Interval>,
    pub terms: Vec<BumpTerm>,
}

/// `amplitude · η(t_h/R) Π_{a≠h} η(t_a/L) · (μω + ramp(t_h) λ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ramp {
    pub mu: f64,
    pub omega: CVec,
    pub lambda: CVec,
    /// R, the cutoff scale along the ramp axis.
    pub cutoff: f64,
    /// L, the cutoff scale across it (unused for n = 1).
    pub transverse: f64,
    /// 0-based ramp axis.
    pub axis: usize,
    pub center: Vec<f64>,
    /// Physical length of one reference unit.
    pub scale: f64,
    pub amplitude: f64,
}

pub type SampledEval = dyn Fn(&[f64]) -> (CVec, Vec<CVec>) + Send + Sync;

/// A user-supplied field: value and exact gradient in physical coordinates.
#[derive(Clone)]
pub struct Sampled {
    pub m: usize,
    pub support: Vec<Interval>,
    /// Interior kinks per axis, used as quadrature breakpoints.
    pub breaks: Vec<Vec<f64>>,
    pub eval: Arc<SampledEval>,
}

impl fmt::Debug for Sampled {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sampled")
            .field("m", &self.m)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum TestFunction {
    PolynomialBump(PolynomialBump),
    Ramp(Ramp),
    Sampled(Sampled),
}

fn check_support(support: &[Interval]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Shape("support needs at least one axis".into()));
    }
    for b in support {
        if !(b.lo < b.hi) || !b.is_bounded() {
            return Err(Error::Precondition(format!(
                "support must be a bounded box, got [{}, {}]",
                b.lo, b.hi
            )));
        }
    }
    Ok(())
}

impl PolynomialBump {
    pub fn new(support: Vec<Interval>, terms: Vec<BumpTerm>) -> Result<Self> {
        check_support(&support)?;
        let m = terms.first().map(|t| t.coeff.len()).unwrap_or(0);
        if m == 0 {
            return Err(Error::Shape("bump needs at least one non-empty term".into()));
        }
        for t in &terms {
            if t.coeff.len() != m || t.powers.len() != support.len() {
                return Err(Error::Shape("bump terms must share m and n".into()));
            }
        }
        Ok(PolynomialBump { support, terms })
    }

    /// `c · Π (ξ(1 − ξ))²`.
    pub fn simple(support: Vec<Interval>, coeff: CVec) -> Result<Self> {
        let n = support.len();
        Self::new(
            support,
            vec![BumpTerm {
                coeff,
                powers: vec![0; n],
            }],
        )
    }

    fn eval_ref(&self, t: &[f64]) -> (CVec, Vec<CVec>) {
        let n = t.len();
        let m = self.terms[0].coeff.len();
        let b: Vec<f64> = t.iter().map(|&x| (x * (1.0 - x)).powi(2)).collect();
        let db: Vec<f64> = t.iter().map(|&x| 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x)).collect();
        let mut poly = CVec::zeros(m);
        let mut dpoly = vec![CVec::zeros(m); n];
        for term in &self.terms {
            let mons: Vec<f64> = t.iter().zip(&term.powers).map(|(&x, &p)| x.powi(p as i32)).collect();
            let prod: f64 = mons.iter().product();
            poly += &term.coeff * C64::new(prod, 0.0);
            for a in 0..n {
                let p = term.powers[a];
                if p == 0 {
                    continue;
                }
                let others: f64 = (0..n).filter(|&c| c != a).map(|c| mons[c]).product();
                let d = p as f64 * t[a].powi(p as i32 - 1) * others;
                dpoly[a] += &term.coeff * C64::new(d, 0.0);
            }
        }
        let bprod: f64 = b.iter().product();
        let v = &poly * C64::new(bprod, 0.0);
        let grad = (0..n)
            .map(|a| {
                let others: f64 = (0..n).filter(|&c| c != a).map(|c| b[c]).product();
                &poly * C64::new(db[a] * others, 0.0) + &dpoly[a] * C64::new(bprod, 0.0)
            })
            .collect();
        (v, grad)
    }
}

impl Ramp {
    pub fn n(&self) -> usize {
        self.center.len()
    }

    fn eval_ref(&self, t: &[f64]) -> (CVec, Vec<CVec>) {
        let n = t.len();
        let h = self.axis;
        let eta: Vec<f64> = (0..n)
            .map(|a| {
                let s = if a == h { self.cutoff } else { self.transverse };
                cutoff(t[a] / s)
            })
            .collect();
        let deta: Vec<f64> = (0..n)
            .map(|a| {
                let s = if a == h { self.cutoff } else { self.transverse };
                cutoff_deriv(t[a] / s) / s
            })
            .collect();
        let w = &self.omega * C64::new(self.mu, 0.0) + &self.lambda * C64::new(ramp(t[h]), 0.0);
        let dw = &self.lambda * C64::new(ramp_deriv(t[h]), 0.0);
        let prod: f64 = eta.iter().product();
        let amp = C64::new(self.amplitude, 0.0);
        let v = &w * C64::new(prod, 0.0) * amp;
        let grad = (0..n)
            .map(|a| {
                let others: f64 = (0..n).filter(|&c| c != a).map(|c| eta[c]).product();
                let mut g = &w * C64::new(deta[a] * others, 0.0);
                if a == h {
                    g += &dw * C64::new(prod, 0.0);
                }
                g * amp
            })
            .collect();
        (v, grad)
    }
}

impl TestFunction {
    pub fn m(&self) -> usize {
        match self {
            TestFunction::PolynomialBump(b) => b.terms[0].coeff.len(),
            TestFunction::Ramp(r) => r.omega.len(),
            TestFunction::Sampled(s) => s.m,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            TestFunction::PolynomialBump(b) => b.support.len(),
            TestFunction::Ramp(r) => r.n(),
            TestFunction::Sampled(s) => s.support.len(),
        }
    }

    /// Physical coordinate of reference point `t`.
    pub fn to_physical(&self, t: &[f64]) -> Vec<f64> {
        match self {
            TestFunction::PolynomialBump(b) => b
                .support
                .iter()
                .zip(t)
                .map(|(iv, &x)| iv.lo + (iv.hi - iv.lo) * x)
                .collect(),
            TestFunction::Ramp(r) => r.center.iter().zip(t).map(|(&c, &x)| c + r.scale * x).collect(),
            TestFunction::Sampled(_) => t.to_vec(),
        }
    }

    /// `dx_a / dt_a` per axis.
    pub fn scales(&self) -> Vec<f64> {
        match self {
            TestFunction::PolynomialBump(b) => b.support.iter().map(|iv| iv.hi - iv.lo).collect(),
            TestFunction::Ramp(r) => vec![r.scale; r.n()],
            TestFunction::Sampled(s) => vec![1.0; s.support.len()],
        }
    }

    /// Quadrature breakpoints per axis in reference coordinates, covering
    /// the support.
    pub fn ref_breaks(&self, axis: usize) -> Vec<f64> {
        match self {
            TestFunction::PolynomialBump(_) => vec![0.0, 1.0],
            TestFunction::Ramp(r) => {
                if axis == r.axis {
                    let big = r.cutoff;
                    let mut b = vec![-big, -0.5 * big, 0.0, 1.0, 0.5 * big, big];
                    b.sort_by(f64::total_cmp);
                    b.dedup();
                    b
                } else {
                    let l = r.transverse;
                    vec![-l, -0.5 * l, 0.5 * l, l]
                }
            }
            TestFunction::Sampled(s) => {
                let iv = s.support[axis];
                let mut b = vec![iv.lo];
                b.extend(s.breaks.get(axis).into_iter().flatten().filter(|&&x| iv.lo < x && x < iv.hi));
                b.push(iv.hi);
                b.sort_by(f64::total_cmp);
                b
            }
        }
    }

    /// Value and gradient with respect to reference coordinates.
    pub fn eval_ref(&self, t: &[f64]) -> (CVec, Vec<CVec>) {
        match self {
            TestFunction::PolynomialBump(b) => b.eval_ref(t),
            TestFunction::Ramp(r) => r.eval_ref(t),
            TestFunction::Sampled(s) => (s.eval)(t),
        }
    }

    /// Value and gradient with respect to physical coordinates.
    pub fn eval(&self, x: &[f64]) -> (CVec, Vec<CVec>) {
        let t: Vec<f64> = match self {
            TestFunction::PolynomialBump(b) => b
                .support
                .iter()
                .zip(x)
                .map(|(iv, &x)| (x - iv.lo) / (iv.hi - iv.lo))
                .collect(),
            TestFunction::Ramp(r) => r.center.iter().zip(x).map(|(&c, &x)| (x - c) / r.scale).collect(),
            TestFunction::Sampled(_) => x.to_vec(),
        };
        let (v, g) = self.eval_ref(&t);
        let g = g
            .into_iter()
            .zip(self.scales())
            .map(|(g, s)| g / C64::new(s, 0.0))
            .collect();
        (v, g)
    }

    /// Physical bounding box of the support.
    pub fn support(&self) -> Vec<Interval> {
        (0..self.n())
            .map(|a| {
                let b = self.ref_breaks(a);
                let mut lo = vec![0.0; self.n()];
                let mut hi = vec![0.0; self.n()];
                lo[a] = b[0];
                hi[a] = *b.last().unwrap();
                Interval::new(self.to_physical(&lo)[a], self.to_physical(&hi)[a])
            })
            .collect()
    }

    /// Writes `x_1..x_n, re_1, im_1, .., re_m, im_m` on a uniform grid of the
    /// support with `per_axis` points per axis.
    pub fn dump_csv(&self, out: impl Write, per_axis: usize) -> Result<()> {
        let n = self.n();
        let m = self.m();
        let per_axis = per_axis.max(2);
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut head: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
        for i in 1..=m {
            head.push(format!("re{i}"));
            head.push(format!("im{i}"));
        }
        w.write_record(&head).map_err(csv_err)?;
        let ranges: Vec<(f64, f64)> = (0..n)
            .map(|a| {
                let b = self.ref_breaks(a);
                (b[0], *b.last().unwrap())
            })
            .collect();
        let total = per_axis.pow(n as u32);
        for flat in 0..total {
            let mut rest = flat;
            let mut t = vec![0.0; n];
            for a in (0..n).rev() {
                let i = rest % per_axis;
                rest /= per_axis;
                let (lo, hi) = ranges[a];
                t[a] = lo + (hi - lo) * i as f64 / (per_axis - 1) as f64;
            }
            let (v, _) = self.eval_ref(&t);
            let mut row: Vec<String> = self.to_physical(&t).iter().map(|x| format!("{x}")).collect();
            for z in v.iter() {
                row.push(format!("{}", z.re));
                row.push(format!("{}", z.im));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_check(f: &TestFunction, t: &[f64]) {
        let (_, g) = f.eval_ref(t);
        let h = 1e-6;
        for a in 0..t.len() {
            let mut tp = t.to_vec();
            let mut tm = t.to_vec();
            tp[a] += h;
            tm[a] -= h;
            let d = (f.eval_ref(&tp).0 - f.eval_ref(&tm).0) / C64::new(2.0 * h, 0.0);
            for i in 0..d.len() {
                assert_relative_eq!(d[i].re, g[a][i].re, epsilon = 1e-6, max_relative = 1e-6);
                assert_relative_eq!(d[i].im, g[a][i].im, epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn cutoff_is_c1() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(-1.2), 0.0);
        assert_relative_eq!(cutoff(0.75), 0.5, epsilon = 1e-15);
        for x in [0.6, -0.7, 0.95] {
            let fd = (cutoff(x + 1e-7) - cutoff(x - 1e-7)) / 2e-7;
            assert_relative_eq!(fd, cutoff_deriv(x), epsilon = 1e-6);
        }
    }

    #[test]
    fn bump_gradient_matches_finite_differences() {
        let b = PolynomialBump::new(
            vec![Interval::new(0.0, 2.0), Interval::new(-1.0, 1.0)],
            vec![
                BumpTerm {
                    coeff: CVec::from_vec(vec![C64::new(1.0, 0.5), C64::new(-0.3, 0.0)]),
                    powers: vec![1, 2],
                },
                BumpTerm {
                    coeff: CVec::from_vec(vec![C64::new(0.2, 0.0), C64::new(0.0, 1.0)]),
                    powers: vec![0, 0],
                },
            ],
        )
        .unwrap();
        let f = TestFunction::PolynomialBump(b);
        fd_check(&f, &[0.3, 0.6]);
        fd_check(&f, &[0.81, 0.12]);
    }

    #[test]
    fn ramp_profile_and_gradient() {
        let r = Ramp {
            mu: 10.0,
            omega: CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            lambda: CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)]),
            cutoff: 20.0,
            transverse: 20.0,
            axis: 0,
            center: vec![0.0, 0.0],
            scale: 1.0,
            amplitude: 1.0,
        };
        let f = TestFunction::Ramp(r);
        let (v, _) = f.eval_ref(&[-3.0, 0.0]);
        assert_eq!(v[0], C64::new(10.0, 0.0));
        let (v, _) = f.eval_ref(&[0.5, 0.0]);
        assert_relative_eq!(v[1].im, 0.5, epsilon = 1e-15);
        fd_check(&f, &[0.4, 1.0]);
        fd_check(&f, &[15.0, 12.0]);
        assert_eq!(f.support()[0], Interval::new(-20.0, 20.0));
    }
}
