//! Numerical evaluation of the integral forms of dissipativity on concrete
//! test functions, independent of the algebraic criteria.

pub mod falsify;
pub mod test_function;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{CoefficientField, DomainBox, FieldKind, Interval, PointMatrices};
use crate::linalg::{cnorm, inner, CMat, CVec, C64};
use crate::phi::{LambdaProfile, PhiFamily, PhiSpec};
use crate::quadrature::simpson_nodes;

pub use falsify::{falsify, falsify_tensor, Counterexample, FalsifyOptions};
pub use test_function::{BumpTerm, PolynomialBump, Ramp, Sampled, TestFunction};

/// Points with `|v| ≤ ZERO_REL · sup |v|` are treated as zeros of `v`.
pub const ZERO_REL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Simpson subintervals per piece; 0 selects 64, 16 or 8 for n = 1, 2, 3.
    pub intervals: usize,
    /// Also evaluate at twice the resolution and compare.
    pub check_convergence: bool,
    /// Allowed change between the two levels, relative to `∫ Σ|terms|`.
    pub rel_tol: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            intervals: 0,
            check_convergence: true,
            rel_tol: 1e-4,
        }
    }
}

impl QuadOptions {
    pub fn with_intervals(intervals: usize) -> Self {
        QuadOptions {
            intervals,
            ..Default::default()
        }
    }

    fn intervals_for(&self, n: usize) -> usize {
        if self.intervals > 0 {
            self.intervals
        } else {
            match n {
                1 => 64,
                2 => 16,
                _ => 8,
            }
        }
    }

    /// The same options at twice the resolution for dimension `n`.
    pub fn doubled(&self, n: usize) -> Self {
        QuadOptions {
            intervals: 2 * self.intervals_for(n),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub lhs: f64,
    /// `∫ |∇v|²` for the v-form, `∫ |∇(√φ(|u|) u)|²` for the u-form.
    pub rhs: f64,
    /// Named parts of `lhs`.
    pub terms: Vec<(String, f64)>,
    /// Quadrature nodes of the reported level.
    pub nodes: usize,
}

impl FunctionalValue {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Coefficients at arbitrary points of the support.
enum Coefs<'a> {
    Fixed(PointMatrices),
    Variable(&'a CoefficientField, &'a DomainBox),
}

impl Coefs<'_> {
    fn new<'a>(field: &'a CoefficientField, domain: &'a DomainBox) -> Result<Coefs<'a>> {
        if field.n() != domain.n() {
            return Err(Error::Shape(format!(
                "field has n = {} but the domain has {} axes",
                field.n(),
                domain.n()
            )));
        }
        Ok(if field.is_constant() {
            Coefs::Fixed(field.eval_point(0, &vec![0.0; field.n()])?)
        } else {
            Coefs::Variable(field, domain)
        })
    }

    fn at(&self, x: &[f64]) -> Result<PointMatrices> {
        match self {
            Coefs::Fixed(p) => Ok(p.clone()),
            Coefs::Variable(field, domain) => {
                let index = match field.kind() {
                    FieldKind::GridPerH { .. } => nearest_index(domain, x)?,
                    _ => 0,
                };
                field.eval_point(index, x)
            }
        }
    }
}

fn nearest_index(domain: &DomainBox, x: &[f64]) -> Result<usize> {
    let mut idx = Vec::with_capacity(domain.n());
    for (a, &xa) in x.iter().enumerate() {
        let pts = domain.axis_points(a)?;
        let i = pts
            .iter()
            .enumerate()
            .min_by(|p, q| (p.1 - xa).abs().total_cmp(&(q.1 - xa).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        idx.push(i);
    }
    Ok(domain.flat_index(&idx))
}

fn check_inside(support: &[Interval], domain: &DomainBox) -> Result<()> {
    for (a, (s, d)) in support.iter().zip(domain.bounds()).enumerate() {
        let slack = 1e-12 * (s.hi - s.lo).abs().max(1.0);
        if s.lo < d.lo - slack || s.hi > d.hi + slack {
            return Err(Error::Precondition(format!(
                "test function support [{}, {}] leaves the domain [{}, {}] on axis {}",
                s.lo,
                s.hi,
                d.lo,
                d.hi,
                a + 1
            )));
        }
    }
    Ok(())
}

/// Tensor-product Simpson over the reference box of `f`; the closure receives
/// the reference point and its weight and returns a fixed-size contribution.
fn integrate<const K: usize>(
    f: &TestFunction,
    intervals: usize,
    g: impl Fn(&[f64], f64) -> Result<[f64; K]> + Sync,
) -> Result<([f64; K], usize)> {
    let n = f.n();
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n).map(|a| simpson_nodes(&f.ref_breaks(a), intervals)).collect();
    let inner_count: usize = axes[1..].iter().map(|(x, _)| x.len()).product();
    let rows: Vec<[f64; K]> = (0..axes[0].0.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = [0.0; K];
            let mut t = vec![0.0; n];
            t[0] = axes[0].0[i];
            for flat in 0..inner_count {
                let mut rest = flat;
                let mut w = axes[0].1[i];
                for a in (1..n).rev() {
                    let len = axes[a].0.len();
                    let j = rest % len;
                    rest /= len;
                    t[a] = axes[a].0[j];
                    w *= axes[a].1[j];
                }
                let c = g(&t, w)?;
                for k in 0..K {
                    acc[k] += c[k];
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; K];
    for r in rows {
        for k in 0..K {
            total[k] += r[k];
        }
    }
    Ok((total, axes.iter().map(|(x, _)| x.len()).product()))
}

fn sup_norm(f: &TestFunction) -> f64 {
    let n = f.n();
    let axes: Vec<Vec<f64>> = (0..n).map(|a| simpson_nodes(&f.ref_breaks(a), 4).0).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut sup: f64 = 0.0;
    let mut t = vec![0.0; n];
    for flat in 0..total {
        let mut rest = flat;
        for a in (0..n).rev() {
            let len = axes[a].len();
            t[a] = axes[a][rest % len];
            rest /= len;
        }
        sup = sup.max(cnorm(&f.eval_ref(&t).0));
    }
    sup
}

fn lambda_fn(profile: &LambdaProfile) -> impl Fn(f64) -> Result<f64> + Sync + '_ {
    let constant = match profile.spec.family {
        PhiFamily::Power { p } => Some(2.0 / p - 1.0),
        _ => None,
    };
    move |t: f64| match constant {
        Some(l) => Ok(l),
        None => profile.lambda_at(t),
    }
}

/// The three v-form terms at one point, for physical gradient `g`.
fn v_terms(mats: &PointMatrices, v: &CVec, g: &[CVec], lam: f64) -> [f64; 3] {
    let r2 = v.norm_squared();
    let rv: Vec<f64> = g.iter().map(|gk| inner(v, gk).re).collect();
    let mut t = [0.0; 3];
    let mut add = |a: &CMat, bt: &CMat, h: usize, k: usize| {
        t[0] += inner(&(a * &g[k]), &g[h]).re;
        t[1] += lam / r2 * inner(&(bt * v), &g[h]).re * rv[k];
        t[2] -= lam * lam / (r2 * r2) * inner(&(a * v), v).re * rv[k] * rv[h];
    };
    match mats {
        PointMatrices::PerH(a) => {
            for (h, ah) in a.iter().enumerate() {
                add(ah, &(ah - ah.adjoint()), h, h);
            }
        }
        PointMatrices::Tensor(a) => {
            for h in 0..a.len() {
                for k in 0..a.len() {
                    add(&a[h][k], &(&a[h][k] - a[k][h].adjoint()), h, k);
                }
            }
        }
    }
    t
}

fn physical_grad(g: Vec<CVec>, scales: &[f64]) -> Vec<CVec> {
    g.into_iter()
        .zip(scales)
        .map(|(g, &s)| g / C64::new(s, 0.0))
        .collect()
}

fn eval_v_once(
    coefs: &Coefs,
    profile: &LambdaProfile,
    v: &TestFunction,
    intervals: usize,
    eps: f64,
) -> Result<(FunctionalValue, f64)> {
    let scales = v.scales();
    let jac: f64 = scales.iter().product();
    let lam = lambda_fn(profile);
    let ([t1, t2, t3, rhs, abs], nodes) = integrate::<5>(v, intervals, |t, w| {
        let (val, g) = v.eval_ref(t);
        let g = physical_grad(g, &scales);
        let w = w * jac;
        let grad2: f64 = g.iter().map(|gk| gk.norm_squared()).sum();
        let r = cnorm(&val);
        if r <= eps || grad2 == 0.0 {
            return Ok([0.0, 0.0, 0.0, w * grad2, 0.0]);
        }
        let mats = coefs.at(&v.to_physical(t))?;
        let tt = v_terms(&mats, &val, &g, lam(r)?);
        Ok([
            w * tt[0],
            w * tt[1],
            w * tt[2],
            w * grad2,
            w * (tt[0].abs() + tt[1].abs() + tt[2].abs()),
        ])
    })?;
    Ok((
        FunctionalValue {
            lhs: t1 + t2 + t3,
            rhs,
            terms: vec![
                ("principal".into(), t1),
                ("lambda".into(), t2),
                ("lambda_sq".into(), t3),
            ],
            nodes,
        },
        abs,
    ))
}

fn converged(
    coarse: (FunctionalValue, f64),
    fine: (FunctionalValue, f64),
    rel_tol: f64,
) -> Result<FunctionalValue> {
    let scale = fine.1.max(coarse.1).max(f64::MIN_POSITIVE);
    if (fine.0.lhs - coarse.0.lhs).abs() > rel_tol * scale || !fine.0.lhs.is_finite() {
        return Err(Error::Quadrature {
            coarse: coarse.0.lhs,
            fine: fine.0.lhs,
        });
    }
    Ok(fine.0)
}

/// `∫ Σ_{h,k} Re<A^{hk} ∂_k v, ∂_h v> + Λ(|v|)|v|⁻² Re<(A^{hk} − (A^{kh})*) v, ∂_h v> Re<v, ∂_k v>
///   − Λ²(|v|)|v|⁻⁴ Re<A^{hk} v, v> Re<v, ∂_k v> Re<v, ∂_h v>`.
pub fn eval_functional_v(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    v: &TestFunction,
    opts: &QuadOptions,
) -> Result<FunctionalValue> {
    check_compatible(field, domain, v)?;
    let coefs = Coefs::new(field, domain)?;
    let eps = ZERO_REL * sup_norm(v);
    let n_int = opts.intervals_for(v.n());
    let coarse = eval_v_once(&coefs, profile, v, n_int, eps)?;
    if !opts.check_convergence {
        return Ok(coarse.0);
    }
    let fine = eval_v_once(&coefs, profile, v, 2 * n_int, eps)?;
    converged(coarse, fine, opts.rel_tol)
}

fn check_compatible(field: &CoefficientField, domain: &DomainBox, v: &TestFunction) -> Result<()> {
    if v.n() != field.n() || v.m() != field.m() {
        return Err(Error::Shape(format!(
            "test function is {}-valued on R^{}, field is {}x{} on R^{}",
            v.m(),
            v.n(),
            field.m(),
            field.m(),
            field.n()
        )));
    }
    check_inside(&v.support(), domain)
}

/// `y = f(|z|) z` and its gradient, for a weight `f` with derivative `df`.
fn weighted(f: f64, df: f64, z: &CVec, gz: &[CVec], r: f64) -> (CVec, Vec<CVec>) {
    let y = z * C64::new(f, 0.0);
    let gy = gz
        .iter()
        .map(|g| g * C64::new(f, 0.0) + z * C64::new(df * inner(z, g).re / r, 0.0))
        .collect();
    (y, gy)
}

fn eval_u_once(
    coefs: &Coefs,
    weight: &PhiSpec,
    dual: bool,
    u: &TestFunction,
    intervals: usize,
    eps: f64,
) -> Result<(FunctionalValue, f64)> {
    let scales = u.scales();
    let jac: f64 = scales.iter().product();
    let ([t1, t2, rhs, abs], nodes) = integrate::<4>(u, intervals, |t, w| {
        let (z, gz) = u.eval_ref(t);
        let gz = physical_grad(gz, &scales);
        let w = w * jac;
        let r = cnorm(&z);
        if r <= eps {
            return Ok([0.0; 4]);
        }
        let f = weight.phi(r);
        let df = weight.dphi(r);
        // the weighted field split into its f ∂z and f' ∂|z| z parts
        let (_, gy) = weighted(f, df, &z, &gz, r);
        let (_, gy_main) = weighted(f, 0.0, &z, &gz, r);
        let sf = f.sqrt();
        let (_, gv) = weighted(sf, 0.5 * df / sf, &z, &gz, r);
        let grad2: f64 = gv.iter().map(|g| g.norm_squared()).sum();
        let mats = coefs.at(&u.to_physical(t))?;
        let mut main = 0.0;
        let mut total = 0.0;
        let mut pair = |a: &CMat, h: usize, k: usize| {
            // primal: Re<A^{hk} ∂_k u, ∂_h(φ u)>; dual: Re<(A^{kh})* ∂_k w, ∂_h(ψ w)>
            let lhs_vec = a * &gz[k];
            main += inner(&lhs_vec, &gy_main[h]).re;
            total += inner(&lhs_vec, &gy[h]).re;
        };
        match &mats {
            PointMatrices::PerH(a) => {
                for (h, ah) in a.iter().enumerate() {
                    let m = if dual { ah.adjoint() } else { ah.clone() };
                    pair(&m, h, h);
                }
            }
            PointMatrices::Tensor(a) => {
                for h in 0..a.len() {
                    for k in 0..a.len() {
                        let m = if dual { a[k][h].adjoint() } else { a[h][k].clone() };
                        pair(&m, h, k);
                    }
                }
            }
        }
        let rest = total - main;
        Ok([w * main, w * rest, w * grad2, w * (main.abs() + rest.abs())])
    })?;
    Ok((
        FunctionalValue {
            lhs: t1 + t2,
            rhs,
            terms: vec![("weight".into(), t1), ("weight_derivative".into(), t2)],
            nodes,
        },
        abs,
    ))
}

/// `Re ∫ <A^{hk} ∂_k u, ∂_h(φ(|u|) u)>` against `∫ |∇(√φ(|u|) u)|²`.
///
/// When `r < 0` the weight is singular at the zeros of `u`; the test function
/// is then read as `w = φ(|u|) u` and the equivalent form
/// `Re ∫ <(A^{kh})* ∂_k w, ∂_h(ψ(|w|) w)>` is evaluated, with `rhs`
/// `∫ |∇(√ψ(|w|) w)|²`.
pub fn eval_functional_u(
    field: &CoefficientField,
    domain: &DomainBox,
    spec: &PhiSpec,
    u: &TestFunction,
    opts: &QuadOptions,
) -> Result<FunctionalValue> {
    check_compatible(field, domain, u)?;
    let coefs = Coefs::new(field, domain)?;
    let dual = spec.r < 0.0;
    let weight = if dual { spec.conjugate()? } else { spec.clone() };
    let eps = ZERO_REL * sup_norm(u);
    let n_int = opts.intervals_for(u.n());
    let coarse = eval_u_once(&coefs, &weight, dual, u, n_int, eps)?;
    if !opts.check_convergence {
        return Ok(coarse.0);
    }
    let fine = eval_u_once(&coefs, &weight, dual, u, 2 * n_int, eps)?;
    converged(coarse, fine, opts.rel_tol)
}

/// `v = √φ(|u|) u` as a sampled test function with exact gradient.
pub fn sqrt_weighted(u: TestFunction, spec: Arc<PhiSpec>) -> TestFunction {
    let n = u.n();
    let m = u.m();
    let support = u.support();
    let breaks = (0..n)
        .map(|a| {
            u.ref_breaks(a)
                .into_iter()
                .map(|t| {
                    let mut p = vec![0.0; n];
                    p[a] = t;
                    u.to_physical(&p)[a]
                })
                .collect()
        })
        .collect();
    let eval = move |x: &[f64]| {
        let (z, gz) = u.eval(x);
        let r = cnorm(&z);
        if r == 0.0 {
            return (z, gz.iter().map(|g| g * C64::new(0.0, 0.0)).collect());
        }
        let f = spec.phi(r).sqrt();
        let df = 0.5 * spec.dphi(r) / f;
        weighted(f, df, &z, &gz, r)
    };
    TestFunction::Sampled(Sampled {
        m,
        support,
        breaks,
        eval: Arc::new(eval),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar_setup(p: f64) -> (CoefficientField, DomainBox, LambdaProfile) {
        (
            CoefficientField::constant(CMat::identity(1, 1)).unwrap(),
            DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 3).unwrap(),
            PhiSpec::power(p).unwrap().lambda_profile().unwrap(),
        )
    }

    fn bump() -> TestFunction {
        TestFunction::PolynomialBump(
            PolynomialBump::simple(vec![Interval::new(0.0, 1.0)], CVec::from_vec(vec![C64::new(1.0, 0.0)])).unwrap(),
        )
    }

    #[test]
    fn closed_form_bump_values() {
        let (f, d, p2) = scalar_setup(2.0);
        let opts = QuadOptions::with_intervals(1024);
        let v = eval_functional_v(&f, &d, &p2, &bump(), &opts).unwrap();
        assert_relative_eq!(v.lhs, 2.0 / 105.0, epsilon = 1e-12);
        assert_relative_eq!(v.rhs, 2.0 / 105.0, epsilon = 1e-12);
        let (_, _, p4) = scalar_setup(4.0);
        let v = eval_functional_v(&f, &d, &p4, &bump(), &opts).unwrap();
        assert_relative_eq!(v.lhs, 1.0 / 70.0, epsilon = 1e-12);
        let sum: f64 = v.terms.iter().map(|t| t.1).sum();
        assert_relative_eq!(sum, v.lhs, epsilon = 1e-14);
    }

    #[test]
    fn zero_function_is_zero() {
        let (f, d, p4) = scalar_setup(4.0);
        let z = TestFunction::PolynomialBump(
            PolynomialBump::simple(vec![Interval::new(0.0, 1.0)], CVec::from_vec(vec![C64::new(0.0, 0.0)])).unwrap(),
        );
        let v = eval_functional_v(&f, &d, &p4, &z, &QuadOptions::default()).unwrap();
        assert_eq!((v.lhs, v.rhs), (0.0, 0.0));
        let u = eval_functional_u(&f, &d, &p4.spec, &z, &QuadOptions::default()).unwrap();
        assert_eq!((u.lhs, u.rhs), (0.0, 0.0));
    }

    #[test]
    fn u_form_with_p_two_is_plain_energy() {
        let (f, d, p2) = scalar_setup(2.0);
        let u = eval_functional_u(&f, &d, &p2.spec, &bump(), &QuadOptions::default()).unwrap();
        assert_relative_eq!(u.lhs, 2.0 / 105.0, epsilon = 1e-7);
        assert_relative_eq!(u.rhs, u.lhs, epsilon = 1e-15);
    }

    #[test]
    fn u_and_v_forms_agree() {
        let (f, d, p4) = scalar_setup(4.0);
        let spec = Arc::new(PhiSpec::power(4.0).unwrap());
        let u = bump();
        let lu = eval_functional_u(&f, &d, &spec, &u, &QuadOptions::default()).unwrap();
        let v = sqrt_weighted(u, spec);
        let lv = eval_functional_v(&f, &d, &p4, &v, &QuadOptions::default()).unwrap();
        assert_relative_eq!(lu.lhs, lv.lhs, max_relative = 1e-6);
        assert_relative_eq!(lu.rhs, lv.rhs, max_relative = 1e-6);
        assert!(lu.ratio() >= 0.75 - 1e-9);
    }

    #[test]
    fn support_outside_domain_is_rejected() {
        let (f, _, p4) = scalar_setup(4.0);
        let d = DomainBox::uniform(vec![Interval::new(0.0, 0.5)], 3).unwrap();
        assert!(matches!(
            eval_functional_v(&f, &d, &p4, &bump(), &QuadOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn simpson_error_drops_sixteenfold() {
        let (f, d, p2) = scalar_setup(2.0);
        let err = |n: usize| {
            let o = QuadOptions {
                intervals: n,
                check_convergence: false,
                ..Default::default()
            };
            (eval_functional_v(&f, &d, &p2, &bump(), &o).unwrap().lhs - 2.0 / 105.0).abs()
        };
        let ratio = err(8) / err(16);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }
}
