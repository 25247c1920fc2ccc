//! Search for test functions on which the integral form is negative.
//!
//! The search follows the necessity construction: a cubic ramp from `μω` to
//! `μω + λ` along the witness direction, cut off at scale `R`. Inside the
//! ramp the integrand is close to `P(λ, ω)`, while the cutoff costs about
//! `μ²/R`, so large `R` is required for small margins.

use rayon::prelude::*;
use serde::Serialize;

use super::test_function::{PolynomialBump, Ramp, TestFunction};
use super::{eval_functional_v, FunctionalValue, QuadOptions};
use crate::dissipativity::Witness;
use crate::error::{Error, Result};
use crate::field::{CoefficientField, DomainBox, Interval, PointMatrices};
use crate::linalg::{cnorm, hermitian_part_min, CMat, CVec, RMat, C64};
use crate::phi::LambdaProfile;

/// A functional counts as negative below `-NEGATIVE_REL · ∫|∇v|²`.
pub const NEGATIVE_REL: f64 = 1e-9;
/// Largest relative change between the two resolutions of a confirmed value.
pub const SIGN_AGREEMENT: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct FalsifyOptions {
    /// Maximum number of test functions evaluated.
    pub budget: usize,
    pub mus: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub quad: QuadOptions,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        FalsifyOptions {
            budget: 256,
            mus: vec![1.0, 3.0, 10.0, 30.0, 100.0, 1e3, 1e4],
            cutoffs: (1..=10).map(|k| 10f64.powi(k)).collect(),
            quad: QuadOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    #[serde(skip)]
    pub test_function: TestFunction,
    pub value: FunctionalValue,
    pub kind: &'static str,
    pub mu: Option<f64>,
    pub cutoff: Option<f64>,
    /// Test functions evaluated, including this one.
    pub attempts: usize,
}

fn is_negative(v: &FunctionalValue) -> bool {
    v.lhs < -NEGATIVE_REL * v.rhs && v.lhs < 0.0
}

/// Negative at the requested resolution and again at twice that resolution,
/// with the two values within [`SIGN_AGREEMENT`] of each other.
fn confirmed(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    f: &TestFunction,
    quad: &QuadOptions,
) -> Option<FunctionalValue> {
    let coarse = QuadOptions {
        check_convergence: false,
        ..quad.clone()
    };
    let first = eval_functional_v(field, domain, profile, f, &coarse).ok()?;
    if !is_negative(&first) {
        return None;
    }
    let fine = QuadOptions {
        check_convergence: false,
        ..quad.doubled(f.n())
    };
    let again = eval_functional_v(field, domain, profile, f, &fine).ok()?;
    let agree = (first.lhs - again.lhs).abs() <= SIGN_AGREEMENT * again.lhs.abs();
    (agree && is_negative(&again)).then_some(again)
}

/// Center and free half-width per axis for a support around `x`.
fn room(field: &CoefficientField, domain: &DomainBox, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut center = Vec::with_capacity(domain.n());
    let mut half = Vec::with_capacity(domain.n());
    for (a, b) in domain.bounds().iter().enumerate() {
        let (c, r) = match (b.lo.is_finite(), b.hi.is_finite()) {
            (true, true) => {
                if field.is_constant() {
                    (0.5 * (b.lo + b.hi), 0.5 * (b.hi - b.lo))
                } else {
                    let delta = 1e-3 * (b.hi - b.lo);
                    let c = x[a].clamp(b.lo + delta, b.hi - delta);
                    (c, (c - b.lo).min(b.hi - c))
                }
            }
            (true, false) => {
                let c = if field.is_constant() { b.lo + 1.0 } else { x[a].max(b.lo + 1e-3) };
                (c, c - b.lo)
            }
            (false, true) => {
                let c = if field.is_constant() { b.hi - 1.0 } else { x[a].min(b.hi - 1e-3) };
                (c, b.hi - c)
            }
            (false, false) => (if field.is_constant() { 0.0 } else { x[a] }, f64::INFINITY),
        };
        center.push(c);
        half.push(r);
    }
    (center, half)
}

/// Magnitude `t` at which `Λ(t)²` is closest to `Λ_∞²` among the profile samples.
fn extremal_level(profile: &LambdaProfile) -> f64 {
    profile
        .samples
        .iter()
        .filter(|(t, l)| t.is_finite() && *t > 0.0 && l.is_finite())
        .max_by(|a, b| (a.1 * a.1).total_cmp(&(b.1 * b.1)))
        .map(|&(t, _)| t)
        .unwrap_or(1.0)
}

/// Elongated bump along the most negative direction of the Hermitian part.
fn positivity_bump(field: &CoefficientField, domain: &DomainBox, x: &[f64], h: usize, a: &CMat) -> Result<Option<TestFunction>> {
    let (mu, c) = hermitian_part_min(a);
    if mu >= -NEGATIVE_REL {
        return Ok(None);
    }
    let (center, half) = room(field, domain, x);
    let finite = half.iter().cloned().filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
    let ell = if finite.is_finite() { finite } else { 1.0 };
    let aspect = if domain.n() > 1 { 1e3 } else { 1.0 };
    let support = center
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w = if i == h { ell / aspect } else { ell };
            Interval::new(c - w, c + w)
        })
        .collect();
    Ok(Some(TestFunction::PolynomialBump(PolynomialBump::simple(support, c)?)))
}

#[allow(clippy::too_many_arguments)]
fn ramp_sweep(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    x: &[f64],
    h: usize,
    lambda: &CVec,
    omega: &CVec,
    opts: &FalsifyOptions,
    mut attempts: usize,
) -> Result<(Option<Counterexample>, usize)> {
    let ln = cnorm(lambda);
    let on = cnorm(omega);
    if !(ln > 0.0) || !(on > 0.0) {
        return Ok((None, attempts));
    }
    let lambda = lambda / C64::new(ln, 0.0);
    let omega = omega / C64::new(on, 0.0);
    let level = extremal_level(profile);
    let (center, half) = room(field, domain, x);
    for &cut in &opts.cutoffs {
        let remaining = opts.budget.saturating_sub(attempts);
        if remaining == 0 {
            break;
        }
        let mus: Vec<f64> = opts.mus.iter().cloned().take(remaining).collect();
        let reach = half.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = if reach.is_finite() { reach / cut } else { 1.0 };
        let candidates: Vec<TestFunction> = mus
            .iter()
            .map(|&mu| {
                TestFunction::Ramp(Ramp {
                    mu,
                    omega: omega.clone(),
                    lambda: lambda.clone(),
                    cutoff: cut,
                    transverse: cut,
                    axis: h,
                    center: center.clone(),
                    scale,
                    amplitude: level / mu,
                })
            })
            .collect();
        let found: Vec<Option<FunctionalValue>> = candidates
            .par_iter()
            .map(|f| confirmed(field, domain, profile, f, &opts.quad))
            .collect();
        for (i, (f, v)) in candidates.into_iter().zip(found).enumerate() {
            if let Some(value) = v {
                return Ok((
                    Some(Counterexample {
                        test_function: f,
                        value,
                        kind: "ramp",
                        mu: Some(mus[i]),
                        cutoff: Some(cut),
                        attempts: attempts + i + 1,
                    }),
                    attempts + i + 1,
                ));
            }
        }
        attempts += mus.len();
    }
    Ok((None, attempts))
}

/// Looks for a test function with a negative integral form near the witness
/// of a per-h verdict. `None` when the budget runs out.
pub fn falsify(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    witness: &Witness,
    opts: &FalsifyOptions,
) -> Result<Option<Counterexample>> {
    if opts.budget == 0 {
        return Ok(None);
    }
    let h = witness.h.checked_sub(1).filter(|&h| h < field.n()).ok_or(Error::Index {
        index: witness.h,
        len: field.n(),
    })?;
    if witness.x.len() != domain.n() {
        return Err(Error::Shape(format!("witness point has {} coordinates", witness.x.len())));
    }
    let index = domain.points().iter().position(|p| *p == witness.x).unwrap_or(0);
    let a = match field.eval_point(index, &witness.x)? {
        PointMatrices::PerH(mut a) => a.swap_remove(h),
        PointMatrices::Tensor(_) => {
            return Err(Error::Precondition("tensor fields are falsified through falsify_tensor".into()));
        }
    };
    let mut attempts = 0;
    if let Some(bump) = positivity_bump(field, domain, &witness.x, h, &a)? {
        attempts += 1;
        if let Some(value) = confirmed(field, domain, profile, &bump, &opts.quad) {
            return Ok(Some(Counterexample {
                test_function: bump,
                value,
                kind: "bump",
                mu: None,
                cutoff: None,
                attempts,
            }));
        }
    }
    let (found, _) = ramp_sweep(
        field,
        domain,
        profile,
        &witness.x,
        h,
        &witness.lambda(),
        &witness.omega(),
        opts,
        attempts,
    )?;
    Ok(found)
}

/// Orthogonal matrix whose first row is `q / |q|`.
pub fn frame_from(q: &[f64]) -> Result<RMat> {
    let n = q.len();
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Precondition("direction q must be nonzero".into()));
    }
    let mut rows: Vec<Vec<f64>> = vec![q.iter().map(|v| v / norm).collect()];
    for e in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v: Vec<f64> = (0..n).map(|i| if i == e { 1.0 } else { 0.0 }).collect();
        for r in &rows {
            let d: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
            for (vi, ri) in v.iter_mut().zip(r) {
                *vi -= d * ri;
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            rows.push(v.iter().map(|x| x / nv).collect());
        }
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

/// `A'^{ab} = Σ Q_ah Q_bk A^{hk}`: the tensor in coordinates `y = Q x`.
pub fn rotate_tensor(tensor: &[Vec<CMat>], q: &RMat) -> Vec<Vec<CMat>> {
    let n = tensor.len();
    let m = tensor[0][0].nrows();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut acc = CMat::zeros(m, m);
                    for h in 0..n {
                        for k in 0..n {
                            acc += &tensor[h][k] * C64::new(q[(a, h)] * q[(b, k)], 0.0);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Ramp search for a constant tensor along the rank-one direction `q`, in
/// rotated coordinates whose first axis is `q`.
pub fn falsify_tensor(
    tensor: &[Vec<CMat>],
    profile: &LambdaProfile,
    q: &[f64],
    lambda: &CVec,
    omega: &CVec,
    opts: &FalsifyOptions,
) -> Result<Option<Counterexample>> {
    if opts.budget == 0 {
        return Ok(None);
    }
    let n = tensor.len();
    let frame = frame_from(q)?;
    let field = CoefficientField::constant_tensor(rotate_tensor(tensor, &frame))?;
    let domain = DomainBox::uniform(vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY); n], 3)?;
    let (found, _) = ramp_sweep(&field, &domain, profile, &vec![0.0; n], 0, lambda, omega, opts, 0)?;
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipativity::{check_ode, CheckOptions};
    use crate::phi::PhiSpec;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0))
    }

    fn setup(a: CMat, p: f64) -> (CoefficientField, DomainBox, LambdaProfile) {
        (
            CoefficientField::constant(a).unwrap(),
            DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 5).unwrap(),
            PhiSpec::power(p).unwrap().lambda_profile().unwrap(),
        )
    }

    #[test]
    fn violated_diagonal_is_falsified() {
        let (f, d, prof) = setup(diag(&[1.0, 16.0]), 4.0);
        let v = check_ode(&f, &d, &prof, &CheckOptions::default()).unwrap();
        let w = v.witness.unwrap();
        let c = falsify(&f, &d, &prof, &w, &FalsifyOptions::default()).unwrap().unwrap();
        assert!(c.value.lhs < 0.0);
        assert_eq!(c.kind, "ramp");
    }

    #[test]
    fn identity_is_never_falsified() {
        let (f, d, prof) = setup(CMat::identity(2, 2), 4.0);
        let v = check_ode(&f, &d, &prof, &CheckOptions::default()).unwrap();
        let w = v.witness.unwrap();
        assert!(falsify(&f, &d, &prof, &w, &FalsifyOptions::default()).unwrap().is_none());
    }

    #[test]
    fn indefinite_real_part_gives_bump() {
        let (f, d, prof) = setup(diag(&[1.0, -0.5]), 2.0);
        let v = check_ode(&f, &d, &prof, &CheckOptions::default()).unwrap();
        let c = falsify(&f, &d, &prof, v.witness.as_ref().unwrap(), &FalsifyOptions::default())
            .unwrap()
            .unwrap();
        assert_eq!(c.kind, "bump");
    }

    #[test]
    fn zero_budget_returns_none() {
        let (f, d, prof) = setup(diag(&[1.0, 16.0]), 4.0);
        let v = check_ode(&f, &d, &prof, &CheckOptions::default()).unwrap();
        let opts = FalsifyOptions {
            budget: 0,
            ..Default::default()
        };
        assert!(falsify(&f, &d, &prof, v.witness.as_ref().unwrap(), &opts).unwrap().is_none());
    }

    #[test]
    fn frame_is_orthogonal() {
        let q = frame_from(&[1.0, 2.0, -0.5]).unwrap();
        let e = &q * q.transpose() - RMat::identity(3, 3);
        assert!(e.amax() < 1e-14);
    }
}
