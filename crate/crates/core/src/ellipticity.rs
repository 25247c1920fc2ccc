//! Strong, integral and weak (rank-one) ellipticity of a coefficient tensor.
//!
//! Strong and weak margins come from sphere minimization; the integral notion
//! is delegated to the dissipativity checker for per-h fields and bracketed
//! between the strong form and the oracle for general tensors.

use rayon::prelude::*;
use serde::Serialize;

use crate::dissipativity::{check_pde_diagonal, CheckOptions, Status, Verdict, DEFAULT_TOL};
use crate::field::{CoefficientField, DomainBox, Interval, PointMatrices};
use crate::instances;
use crate::linalg::{CMat, CVec};
use crate::oracle::{falsify_tensor, Counterexample, FalsifyOptions};
use crate::phi::LambdaProfile;
use crate::spectral::{lambda_sweep, min_p, strong_form_min, weak_form_min, CriterionForm, MinOptions, MIN_STARTS};
use crate::{Error, Result};

pub const DEFAULT_Q_DIRECTIONS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Holds,
    Fails,
    Inconclusive,
}

impl Tri {
    pub fn from_margin(margin: f64, cond_l: bool, tol: f64) -> Tri {
        if margin > tol && cond_l {
            Tri::Holds
        } else if margin < -tol {
            Tri::Fails
        } else {
            Tri::Inconclusive
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongWitness {
    pub x: Vec<f64>,
    pub lambda_value: f64,
    pub xi_re: Vec<Vec<f64>>,
    pub xi_im: Vec<Vec<f64>>,
    pub omega_re: Vec<f64>,
    pub omega_im: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakWitness {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub lambda_value: f64,
    pub lambda_re: Vec<f64>,
    pub lambda_im: Vec<f64>,
    pub omega_re: Vec<f64>,
    pub omega_im: Vec<f64>,
}

impl WeakWitness {
    pub fn lambda(&self) -> CVec {
        join(&self.lambda_re, &self.lambda_im)
    }

    pub fn omega(&self) -> CVec {
        join(&self.omega_re, &self.omega_im)
    }
}

fn split(v: &CVec) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

fn join(re: &[f64], im: &[f64]) -> CVec {
    CVec::from_iterator(re.len(), re.iter().zip(im).map(|(&a, &b)| crate::linalg::C64::new(a, b)))
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongPart {
    pub holds: Tri,
    pub margin: f64,
    pub kappa: f64,
    pub witness: StrongWitness,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakPart {
    pub holds: Tri,
    pub margin: f64,
    pub kappa: f64,
    pub witness: WeakWitness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralBasis {
    /// Per-h field: the strict dissipativity verdict.
    StrictVerdict,
    /// General tensor: implied by the strong form.
    StrongForm,
    /// General tensor: a test function with negative integral form.
    Falsified,
    /// General tensor: neither bracket resolved.
    Unresolved,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralPart {
    pub holds: Tri,
    pub kappa: f64,
    pub basis: IntegralBasis,
    pub verdict: Option<Verdict>,
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Consistency {
    /// False when strong holds but integral fails.
    pub strong_implies_integral: bool,
    /// False when integral holds but weak fails; `None` for general tensors.
    pub integral_implies_weak: Option<bool>,
    /// Per-h fields under `Λ_∞² < 1`: the sampled weak margin matches the
    /// smallest per-h margin within `1e-6`.
    pub weak_matches_per_h: Option<bool>,
}

impl Consistency {
    pub fn ok(&self) -> bool {
        self.strong_implies_integral && self.integral_implies_weak != Some(false) && self.weak_matches_per_h != Some(false)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub per_h: bool,
    pub lambda_inf_sq: f64,
    pub cond_l: bool,
    pub points: usize,
    pub q_directions: usize,
    pub strong: StrongPart,
    pub integral: IntegralPart,
    pub weak: WeakPart,
    pub consistency: Consistency,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub q_directions: usize,
    pub falsify: FalsifyOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            starts: 16,
            seed: 42,
            tol: DEFAULT_TOL,
            q_directions: DEFAULT_Q_DIRECTIONS,
            falsify: FalsifyOptions::default(),
        }
    }
}

impl ClassifyOptions {
    fn check_options(&self) -> CheckOptions {
        CheckOptions {
            starts: self.starts,
            seed: self.seed,
            tol: self.tol,
        }
    }

    fn min_options(&self, extra: Vec<CVec>) -> MinOptions {
        MinOptions {
            starts: self.starts,
            seed: self.seed,
            extra_omegas: extra,
        }
    }
}

/// Unit directions for the rank-one sweep: `count` samples of the sphere in
/// `R^n` followed by the coordinate axes.
pub fn q_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut qs: Vec<Vec<f64>> = match n {
        0 => Vec::new(),
        1 => Vec::new(),
        2 => (0..count)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => crate::spectral::sphere::random_starts(n, count, 0x5eed)
            .into_iter()
            .map(|v| {
                let v = &v / v.norm();
                v.iter().copied().collect()
            })
            .collect(),
    };
    for h in 0..n {
        qs.push((0..n).map(|k| if k == h { 1.0 } else { 0.0 }).collect());
    }
    qs
}

fn lambda_values(profile: &LambdaProfile) -> Vec<f64> {
    if profile.cond_l {
        vec![profile.lambda_inf]
    } else {
        lambda_sweep(profile.range)
    }
}

struct WeakBest {
    margin: f64,
    q: Vec<f64>,
    lambda_value: f64,
    lambda: CVec,
    omega: CVec,
}

fn weak_sweep(
    tensor: &[Vec<CMat>],
    lambdas: &[f64],
    qs: &[Vec<f64>],
    opts: &MinOptions,
) -> Result<WeakBest> {
    let jobs: Vec<(f64, &Vec<f64>)> = lambdas.iter().flat_map(|&l| qs.iter().map(move |q| (l, q))).collect();
    let found = jobs
        .par_iter()
        .map(|&(l, q)| weak_form_min(tensor, q, l, opts).map(|r| (l, q, r)))
        .collect::<Result<Vec<_>>>()?;
    let (l, q, r) = found
        .into_iter()
        .reduce(|a, b| if b.2.margin < a.2.margin { b } else { a })
        .ok_or_else(|| Error::Precondition("weak sweep needs at least one direction".into()))?;
    Ok(WeakBest {
        margin: r.margin,
        q: q.clone(),
        lambda_value: l,
        lambda: r.lambda,
        omega: r.omega,
    })
}

struct PointResult {
    x: Vec<f64>,
    strong: crate::spectral::StrongMin,
    weak: WeakBest,
    per_h_min: Option<f64>,
}

fn classify_point(
    x: Vec<f64>,
    mats: PointMatrices,
    m: usize,
    profile: &LambdaProfile,
    qs: &[Vec<f64>],
    opts: &ClassifyOptions,
) -> Result<PointResult> {
    let lambdas = lambda_values(profile);
    let mut seeds = Vec::new();
    let mut per_h_min = None;
    if let PointMatrices::PerH(a) = &mats {
        let mut worst = f64::INFINITY;
        for ah in a {
            let r = min_p(&CriterionForm::new(ah.clone(), profile.lambda_inf)?, &opts.min_options(Vec::new()))?;
            worst = worst.min(r.margin);
            seeds.push(r.omega);
        }
        per_h_min = Some(worst);
    }
    let tensor = CoefficientField::as_tensor(&mats, m);
    let weak_opts = MinOptions {
        starts: (opts.starts / 2).max(MIN_STARTS),
        ..opts.min_options(seeds.clone())
    };
    let weak = weak_sweep(&tensor, &lambdas, qs, &weak_opts)?;
    seeds.push(weak.omega.clone());
    let range = (lambdas[0], lambdas[lambdas.len() - 1]);
    let strong = strong_form_min(&tensor, range, &opts.min_options(seeds))?;
    Ok(PointResult {
        x,
        strong,
        weak,
        per_h_min,
    })
}

/// Classifies a per-h field or a constant tensor against the three
/// ellipticity notions. Variable fields report their worst sample point.
pub fn classify(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &ClassifyOptions,
) -> Result<EllipticityReport> {
    if domain.n() != field.n() {
        return Err(Error::Shape(format!(
            "field has n = {} but the domain has {} axes",
            field.n(),
            domain.n()
        )));
    }
    let n = field.n();
    let m = field.m();
    let qs = q_directions(n, opts.q_directions);
    let results: Vec<PointResult> = if field.is_constant() {
        let x0 = domain.points().into_iter().next().ok_or(Error::EmptyDomain)?;
        let mats = field.eval_point(0, &x0)?;
        vec![classify_point(x0, mats, m, profile, &qs, opts)?]
    } else {
        field.map_samples(domain, |s| classify_point(s.x, s.matrices, m, profile, &qs, opts))?
    };
    let strong_at = results
        .iter()
        .reduce(|a, b| if b.strong.margin < a.strong.margin { b } else { a })
        .ok_or(Error::EmptyDomain)?;
    let weak_at = results
        .iter()
        .reduce(|a, b| if b.weak.margin < a.weak.margin { b } else { a })
        .ok_or(Error::EmptyDomain)?;
    let tol = opts.tol;

    let s = &strong_at.strong;
    let (xi_re, xi_im): (Vec<_>, Vec<_>) = s.xi.iter().map(split).unzip();
    let (omega_re, omega_im) = split(&s.omega);
    let strong_holds = Tri::from_margin(s.margin, profile.cond_l, tol);
    let strong = StrongPart {
        holds: strong_holds,
        margin: s.margin,
        kappa: if strong_holds == Tri::Holds { s.margin } else { 0.0 },
        witness: StrongWitness {
            x: strong_at.x.clone(),
            lambda_value: s.lambda,
            xi_re,
            xi_im,
            omega_re,
            omega_im,
        },
    };

    let w = &weak_at.weak;
    let (lambda_re, lambda_im) = split(&w.lambda);
    let (omega_re, omega_im) = split(&w.omega);
    let weak_holds = Tri::from_margin(w.margin, profile.cond_l, tol);
    let weak = WeakPart {
        holds: weak_holds,
        margin: w.margin,
        kappa: if weak_holds == Tri::Holds { w.margin } else { 0.0 },
        witness: WeakWitness {
            x: weak_at.x.clone(),
            q: w.q.clone(),
            lambda_value: w.lambda_value,
            lambda_re,
            lambda_im,
            omega_re,
            omega_im,
        },
    };

    let integral = if field.is_per_h() {
        let verdict = check_pde_diagonal(field, domain, profile, &opts.check_options())?;
        let holds = match verdict.status {
            Status::StrictlyDissipative => Tri::Holds,
            Status::NotDissipative => Tri::Fails,
            Status::Dissipative | Status::Inconclusive => Tri::Inconclusive,
        };
        IntegralPart {
            holds,
            kappa: verdict.kappa,
            basis: IntegralBasis::StrictVerdict,
            verdict: Some(verdict),
            counterexample: None,
        }
    } else if strong.holds == Tri::Holds {
        IntegralPart {
            holds: Tri::Holds,
            kappa: strong.kappa,
            basis: IntegralBasis::StrongForm,
            verdict: None,
            counterexample: None,
        }
    } else {
        let found = if weak.holds == Tri::Fails && field.is_constant() {
            let mats = field.eval_point(0, &weak.witness.x)?;
            let tensor = CoefficientField::as_tensor(&mats, m);
            falsify_tensor(
                &tensor,
                profile,
                &weak.witness.q,
                &weak.witness.lambda(),
                &weak.witness.omega(),
                &opts.falsify,
            )?
        } else {
            None
        };
        match found {
            Some(c) => IntegralPart {
                holds: Tri::Fails,
                kappa: 0.0,
                basis: IntegralBasis::Falsified,
                verdict: None,
                counterexample: Some(c),
            },
            None => IntegralPart {
                holds: Tri::Inconclusive,
                kappa: 0.0,
                basis: IntegralBasis::Unresolved,
                verdict: None,
                counterexample: None,
            },
        }
    };

    let per_h_min = results.iter().filter_map(|r| r.per_h_min).reduce(f64::min);
    let consistency = Consistency {
        strong_implies_integral: !(strong.holds == Tri::Holds && integral.holds == Tri::Fails),
        integral_implies_weak: field
            .is_per_h()
            .then_some(!(integral.holds == Tri::Holds && weak.holds == Tri::Fails)),
        weak_matches_per_h: per_h_min
            .filter(|_| profile.cond_l)
            .map(|p| (weak.margin - p).abs() <= 1e-6),
    };

    Ok(EllipticityReport {
        per_h: field.is_per_h(),
        lambda_inf_sq: profile.lambda_inf_sq,
        cond_l: profile.cond_l,
        points: if field.is_constant() { 1 } else { domain.total_points() },
        q_directions: qs.len(),
        strong,
        integral,
        weak,
        consistency,
    })
}

/// [`classify`] for a constant tensor `A^{hk}` on the whole space.
pub fn classify_tensor(tensor: Vec<Vec<CMat>>, profile: &LambdaProfile, opts: &ClassifyOptions) -> Result<EllipticityReport> {
    let field = CoefficientField::constant_tensor(tensor)?;
    let domain = DomainBox::uniform(vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY); field.n()], 3)?;
    classify(&field, &domain, profile, opts)
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub trial: usize,
    pub weak_margin: f64,
    pub per_h_margin: f64,
    pub weak: Tri,
    pub per_h: Tri,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    pub trials: usize,
    pub compared: usize,
    pub band_skipped: usize,
    pub disagreements: Vec<Disagreement>,
}

/// Compares the weak verdict with the conjunction of per-h strict verdicts on
/// `trials` random constant per-h fields. Trial `i` draws from seed `seed + i`
/// with perturbation size cycling through `[0.1, 1.3)`.
pub fn equivalence_harness(
    m: usize,
    n: usize,
    profile: &LambdaProfile,
    trials: usize,
    seed: u64,
    opts: &ClassifyOptions,
) -> Result<HarnessReport> {
    let qs = q_directions(n, opts.q_directions);
    let lambdas = lambda_values(profile);
    let band = opts.tol.max(1e-6);
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Option<Option<Disagreement>>> {
            let spread = 0.1 + 1.2 * ((i * 7) % 12) as f64 / 12.0;
            let field = instances::random_per_h(&mut instances::rng(seed.wrapping_add(i as u64)), m, n, spread)?;
            let domain = DomainBox::uniform(vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY); n], 3)?;
            let verdict = check_pde_diagonal(&field, &domain, profile, &opts.check_options())?;
            let mats = field.eval_point(0, &vec![0.0; n])?;
            let tensor = CoefficientField::as_tensor(&mats, m);
            let weak = weak_sweep(&tensor, &lambdas, &qs, &opts.min_options(Vec::new()))?;
            if verdict.margin.abs() <= band || weak.margin.abs() <= band {
                return Ok(None);
            }
            let per_h = Tri::from_margin(verdict.margin, profile.cond_l, opts.tol);
            let weak_tri = Tri::from_margin(weak.margin, profile.cond_l, opts.tol);
            Ok(Some((per_h != weak_tri).then_some(Disagreement {
                trial: i,
                weak_margin: weak.margin,
                per_h_margin: verdict.margin,
                weak: weak_tri,
                per_h,
            })))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = HarnessReport {
        trials,
        compared: 0,
        band_skipped: 0,
        disagreements: Vec::new(),
    };
    for o in outcomes {
        match o {
            None => report.band_skipped += 1,
            Some(d) => {
                report.compared += 1;
                report.disagreements.extend(d);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::phi::PhiSpec;

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0))
    }

    fn identity_tensor(m: usize, n: usize) -> Vec<Vec<CMat>> {
        (0..n)
            .map(|h| (0..n).map(|k| if h == k { CMat::identity(m, m) } else { CMat::zeros(m, m) }).collect())
            .collect()
    }

    fn quick() -> ClassifyOptions {
        ClassifyOptions {
            q_directions: 32,
            ..Default::default()
        }
    }

    #[test]
    fn identity_tensor_all_hold() {
        let profile = PhiSpec::power(4.0).unwrap().lambda_profile().unwrap();
        let r = classify_tensor(identity_tensor(2, 2), &profile, &quick()).unwrap();
        assert_eq!(r.strong.holds, Tri::Holds);
        assert_eq!(r.integral.holds, Tri::Holds);
        assert_eq!(r.weak.holds, Tri::Holds);
        assert!((r.strong.kappa - 0.75).abs() < 1e-8);
        assert!((r.weak.kappa - 0.75).abs() < 1e-8);
    }

    #[test]
    fn bad_per_h_block_fails_everywhere() {
        let profile = PhiSpec::power(4.0).unwrap().lambda_profile().unwrap();
        let field = CoefficientField::constant_per_h(vec![CMat::identity(2, 2), diag(&[1.0, 16.0])]).unwrap();
        let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0); 2], 3).unwrap();
        let r = classify(&field, &domain, &profile, &quick()).unwrap();
        assert_eq!(r.weak.holds, Tri::Fails);
        assert_eq!(r.integral.holds, Tri::Fails);
        assert_eq!(r.strong.holds, Tri::Fails);
        assert!(r.consistency.ok());
    }

    #[test]
    fn p2_reduces_to_symbol_positivity() {
        let profile = PhiSpec::power(2.0).unwrap().lambda_profile().unwrap();
        let field = CoefficientField::constant_per_h(vec![diag(&[1.0, 16.0]), diag(&[2.0, 3.0])]).unwrap();
        let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0); 2], 3).unwrap();
        let r = classify(&field, &domain, &profile, &quick()).unwrap();
        assert!((r.weak.margin - 1.0).abs() < 1e-8);
        assert!((r.strong.margin - 1.0).abs() < 1e-8);
        assert_eq!(r.integral.holds, Tri::Holds);
    }

    #[test]
    fn q_grid_has_axes_and_unit_norm() {
        for n in 1..=4 {
            let qs = q_directions(n, 16);
            assert!(qs.len() >= n);
            for q in &qs {
                let norm: f64 = q.iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harness_small_run() {
        let profile = PhiSpec::power(3.0).unwrap().lambda_profile().unwrap();
        let r = equivalence_harness(2, 2, &profile, 4, 1, &quick()).unwrap();
        assert_eq!(r.trials, 4);
        assert!(r.disagreements.is_empty());
    }
}
