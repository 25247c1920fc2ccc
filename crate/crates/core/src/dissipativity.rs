//! Pointwise verdicts for ODE and per-h PDE operators.
//!
//! Each sample point and each direction `h` contributes `min P` over the unit
//! spheres, evaluated at `Λ = Λ_∞`. The verdict is the minimum over all of
//! them, stamped with the number of grid points it was certified on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoefficientField, DomainBox, PointMatrices};
use crate::linalg::{cnorm, hermitian_part_min, is_real_symmetric, real_part, CMat, CVec, C64};
use crate::phi::LambdaProfile;
use crate::spectral::{eval_p, min_p, CriterionForm, EigenSummary, MinOptions};

/// Margins at or above `-DISSIPATIVE_FLOOR` count as nonnegative.
pub const DISSIPATIVE_FLOOR: f64 = 1e-9;
/// Default half-width of the band around zero that cannot be signed.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Target accuracy of the supremal κ search.
pub const KAPPA_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Dissipative,
    StrictlyDissipative,
    NotDissipative,
    Inconclusive,
}

impl Status {
    /// Nonnegative form (strict or not).
    pub fn is_dissipative(self) -> bool {
        matches!(self, Status::Dissipative | Status::StrictlyDissipative)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::StrictlyDissipative => 0,
            Status::Dissipative => 1,
            Status::NotDissipative => 2,
            Status::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Multistart sphere minimization of P.
    Sphere,
    /// Negative eigenvalue of the Hermitian part.
    PositivityScreen,
    /// Eigenvalue inequalities for real symmetric coefficients.
    Eigenvalue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    /// 1-based derivative direction.
    pub h: usize,
    pub lambda_re: Vec<f64>,
    pub lambda_im: Vec<f64>,
    pub omega_re: Vec<f64>,
    pub omega_im: Vec<f64>,
    /// `P(λ, ω)` at this point.
    pub value: f64,
}

impl Witness {
    pub fn new(x: Vec<f64>, h: usize, lambda: &CVec, omega: &CVec, value: f64) -> Self {
        Witness {
            x,
            h,
            lambda_re: lambda.iter().map(|z| z.re).collect(),
            lambda_im: lambda.iter().map(|z| z.im).collect(),
            omega_re: omega.iter().map(|z| z.re).collect(),
            omega_im: omega.iter().map(|z| z.im).collect(),
            value,
        }
    }

    pub fn lambda(&self) -> CVec {
        CVec::from_iterator(
            self.lambda_re.len(),
            self.lambda_re.iter().zip(&self.lambda_im).map(|(&r, &i)| C64::new(r, i)),
        )
    }

    pub fn omega(&self) -> CVec {
        CVec::from_iterator(
            self.omega_re.len(),
            self.omega_re.iter().zip(&self.omega_im).map(|(&r, &i)| C64::new(r, i)),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub margin: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub lambda_inf_sq: f64,
    pub certified_points: usize,
    pub method: Method,
    pub warnings: Vec<String>,
    /// Worst point found; present for every status.
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            starts: 16,
            seed: 42,
            tol: DEFAULT_TOL,
        }
    }
}

impl CheckOptions {
    fn min_options(&self) -> MinOptions {
        MinOptions {
            starts: self.starts,
            seed: self.seed,
            extra_omegas: Vec::new(),
        }
    }
}

pub fn status_from_margin(margin: f64, cond_l: bool, tol: f64) -> Status {
    if margin > tol && cond_l {
        Status::StrictlyDissipative
    } else if margin >= -DISSIPATIVE_FLOOR {
        Status::Dissipative
    } else if margin < -tol {
        Status::NotDissipative
    } else {
        Status::Inconclusive
    }
}

/// Worst value of one matrix: positivity screen first, then the sphere search.
fn matrix_min(a: &CMat, lambda: f64, opts: &MinOptions) -> Result<(f64, CVec, CVec, Method)> {
    let (mu, v) = hermitian_part_min(a);
    if mu < -DISSIPATIVE_FLOOR {
        let omega = v.map(|z| z * C64::i());
        return Ok((mu, v, omega, Method::PositivityScreen));
    }
    let r = min_p(&CriterionForm::new(a.clone(), lambda)?, opts)?;
    Ok((r.margin, r.lambda, r.omega, Method::Sphere))
}

/// Per-h worst values at one sample point.
#[derive(Clone, Debug)]
pub struct PointMargin {
    pub x: Vec<f64>,
    pub per_h: Vec<f64>,
    pub aggregate: f64,
}

struct Worst {
    margin: f64,
    witness: Witness,
    method: Method,
}

fn per_h_mats(mats: PointMatrices) -> Result<Vec<CMat>> {
    match mats {
        PointMatrices::PerH(a) => Ok(a),
        PointMatrices::Tensor(_) => Err(Error::Precondition(
            "general A^{hk} tensors have no pointwise iff-criterion; use the ellipticity classifier".into(),
        )),
    }
}

fn require_per_h(field: &CoefficientField) -> Result<()> {
    if field.is_per_h() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "general A^{hk} tensors have no pointwise iff-criterion; use the ellipticity classifier".into(),
        ))
    }
}

fn scan(
    field: &CoefficientField,
    domain: &DomainBox,
    lambda: f64,
    opts: &CheckOptions,
) -> Result<(Vec<PointMargin>, Worst)> {
    require_per_h(field)?;
    let mo = opts.min_options();
    let eval = |x: Vec<f64>, mats: Vec<CMat>| -> Result<(PointMargin, Worst)> {
        let mut per_h = Vec::with_capacity(mats.len());
        let mut worst: Option<Worst> = None;
        for (h, a) in mats.iter().enumerate() {
            let (v, l, w, method) = matrix_min(a, lambda, &mo)?;
            per_h.push(v);
            if worst.as_ref().is_none_or(|b| v < b.margin) {
                worst = Some(Worst {
                    margin: v,
                    witness: Witness::new(x.clone(), h + 1, &l, &w, v),
                    method,
                });
            }
        }
        let worst = worst.expect("at least one direction");
        Ok((
            PointMargin {
                x,
                aggregate: worst.margin,
                per_h,
            },
            worst,
        ))
    };
    if field.is_constant() {
        if domain.n() != field.n() {
            return Err(Error::Shape(format!(
                "field has n = {} but the domain has {} axes",
                field.n(),
                domain.n()
            )));
        }
        let points = domain.points();
        let x0 = points.first().ok_or(Error::EmptyDomain)?.clone();
        let mats = per_h_mats(field.eval_point(0, &x0)?)?;
        let (first, worst) = eval(x0, mats)?;
        let map = points
            .into_iter()
            .map(|x| PointMargin {
                x,
                per_h: first.per_h.clone(),
                aggregate: first.aggregate,
            })
            .collect();
        return Ok((map, worst));
    }
    let results = field.map_samples(domain, |s| eval(s.x, per_h_mats(s.matrices)?))?;
    let mut worst: Option<Worst> = None;
    let mut map = Vec::with_capacity(results.len());
    for (pm, w) in results {
        map.push(pm);
        if worst.as_ref().is_none_or(|b| w.margin < b.margin) {
            worst = Some(w);
        }
    }
    Ok((map, worst.ok_or(Error::EmptyDomain)?))
}

fn verdict_from(worst: Worst, points: usize, profile: &LambdaProfile, domain: &DomainBox, tol: f64) -> Verdict {
    let status = status_from_margin(worst.margin, profile.cond_l, tol);
    let (kappa, kappa_prime) = if status == Status::StrictlyDissipative {
        (worst.margin / (1.0 - profile.lambda_inf_sq), worst.margin)
    } else {
        (0.0, 0.0)
    };
    let mut warnings = domain.warnings();
    if !profile.tail_resolved {
        warnings.push("Lambda limit taken from the tail model of the weight table".into());
    }
    Verdict {
        status,
        margin: worst.margin,
        kappa,
        kappa_prime,
        lambda_inf_sq: profile.lambda_inf_sq,
        certified_points: points,
        method: worst.method,
        warnings,
        witness: Some(worst.witness),
    }
}

/// Verdict for `(A(x) u')'` on an interval.
pub fn check_ode(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &CheckOptions,
) -> Result<Verdict> {
    if field.n() != 1 {
        return Err(Error::Precondition(format!("check_ode needs n = 1, got n = {}", field.n())));
    }
    check_pde_diagonal(field, domain, profile, opts)
}

/// Verdict for `Σ_h ∂_h(A^h(x) ∂_h u)`.
pub fn check_pde_diagonal(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &CheckOptions,
) -> Result<Verdict> {
    let (map, worst) = scan(field, domain, profile.lambda_inf, opts)?;
    Ok(verdict_from(worst, map.len(), profile, domain, opts.tol))
}

/// Per-point, per-h margins over the sample grid.
pub fn margin_map(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &CheckOptions,
) -> Result<Vec<PointMargin>> {
    Ok(scan(field, domain, profile.lambda_inf, opts)?.0)
}

/// Verdict from eigenvalue inequalities alone. Fails with
/// [`Error::FastPathUnavailable`] unless every sampled matrix is real
/// symmetric and positive definite.
pub fn check_symmetric_fast(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &CheckOptions,
) -> Result<Verdict> {
    require_per_h(field)?;
    let c = (1.0 - profile.lambda_inf_sq).max(0.0).sqrt();
    let per_point = field.map_samples(domain, |s| {
        let mats = per_h_mats(s.matrices)?;
        let mut best: Option<(f64, f64, usize)> = None;
        for (h, a) in mats.iter().enumerate() {
            if !is_real_symmetric(a, 1e-12) {
                return Err(Error::FastPathUnavailable(format!(
                    "A^{} at x = {:?} is not real symmetric",
                    h + 1,
                    s.x
                )));
            }
            let e = EigenSummary::of(&crate::linalg::sym(&real_part(a)))?;
            if e.mu_min <= 0.0 {
                return Err(Error::FastPathUnavailable(format!(
                    "A^{} at x = {:?} is not positive definite",
                    h + 1,
                    s.x
                )));
            }
            let margin = (1.0 + c) * e.mu_min - (1.0 - c) * e.mu_max;
            let band = 1e-12 * (e.mu_min + e.mu_max);
            if best.is_none_or(|b| margin < b.0) {
                best = Some((margin, band, h));
            }
        }
        Ok((s.x, best.expect("n >= 1")))
    })?;
    let (x, (margin, band, h)) = per_point
        .into_iter()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .ok_or(Error::EmptyDomain)?;
    let status = if margin < -band {
        Status::NotDissipative
    } else if margin <= band || !profile.cond_l {
        Status::Dissipative
    } else {
        Status::StrictlyDissipative
    };
    let (kappa, kappa_prime) = if status == Status::StrictlyDissipative {
        let k = margin / (2.0 * c);
        (k, (1.0 - profile.lambda_inf_sq) * k)
    } else {
        (0.0, 0.0)
    };
    let index = domain.points().iter().position(|p| *p == x).unwrap_or(0);
    let a = per_h_mats(field.eval_point(index, &x)?)?.swap_remove(h);
    let r = min_p(&CriterionForm::new(a, profile.lambda_inf)?, &opts.min_options())?;
    Ok(Verdict {
        status,
        margin,
        kappa,
        kappa_prime,
        lambda_inf_sq: profile.lambda_inf_sq,
        certified_points: domain.total_points(),
        method: Method::Eigenvalue,
        warnings: domain.warnings(),
        witness: Some(Witness::new(x, h + 1, &r.lambda, &r.omega, r.margin)),
    })
}

fn shifted(field: &CoefficientField, kappa: f64) -> Result<CoefficientField> {
    use crate::field::FieldKind;
    let m = field.m();
    let shift = CMat::identity(m, m) * C64::new(kappa, 0.0);
    match field.kind() {
        FieldKind::ConstantPerH(a) => CoefficientField::constant_per_h(a.iter().map(|a| a - &shift).collect()),
        FieldKind::GridPerH { shape, values } => CoefficientField::grid_per_h(
            shape.clone(),
            values
                .iter()
                .map(|mats| mats.iter().map(|a| a - &shift).collect())
                .collect(),
        ),
        FieldKind::Callback { eval, single_threaded } => {
            let eval = std::sync::Arc::clone(eval);
            CoefficientField::callback(
                m,
                field.n(),
                move |x| eval(x).into_iter().map(|a| a - &shift).collect(),
                *single_threaded,
            )
        }
        FieldKind::ConstantTensor(_) => Err(Error::Precondition("shift check needs a per-h field".into())),
    }
}

/// Checks `A − κ I` with the standard criterion; a κ passes when the
/// shifted verdict is dissipative.
pub fn kappa_shift_check(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    kappa: f64,
    opts: &CheckOptions,
) -> Result<Verdict> {
    if !profile.cond_l {
        return Err(Error::UnsupportedRegime(format!(
            "kappa shift needs Lambda_inf^2 < 1, got {}",
            profile.lambda_inf_sq
        )));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Precondition(format!("kappa must be nonnegative, got {kappa}")));
    }
    check_pde_diagonal(&shifted(field, kappa)?, domain, profile, opts)
}

/// Largest κ for which the shifted check passes, to within [`KAPPA_TOL`].
/// `None` when no κ above the tolerance passes.
pub fn supremal_kappa(
    field: &CoefficientField,
    domain: &DomainBox,
    profile: &LambdaProfile,
    opts: &CheckOptions,
) -> Result<Option<f64>> {
    let base = kappa_shift_check(field, domain, profile, 0.0, opts)?;
    if base.margin <= 0.0 {
        return Ok(None);
    }
    let passes = |k: f64| -> Result<bool> {
        Ok(kappa_shift_check(field, domain, profile, k, opts)?.status.is_dissipative())
    };
    // the subtracted term lies between (1 − Λ_∞²)κ and κ
    let mut lo = 0.0;
    let mut hi = base.margin / (1.0 - profile.lambda_inf_sq) + 2.0 * KAPPA_TOL;
    while passes(hi)? {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > KAPPA_TOL {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo > KAPPA_TOL).then_some(lo))
}

/// Value of `P` at the witness of a verdict, recomputed from the field.
pub fn witness_value(field: &CoefficientField, domain: &DomainBox, profile: &LambdaProfile, w: &Witness) -> Result<f64> {
    let index = domain.points().iter().position(|p| *p == w.x).unwrap_or(0);
    let mats = per_h_mats(field.eval_point(index, &w.x)?)?;
    let a = mats
        .get(w.h.wrapping_sub(1))
        .ok_or(Error::Index {
            index: w.h,
            len: mats.len(),
        })?
        .clone();
    let omega = w.omega();
    let omega = &omega / C64::new(cnorm(&omega), 0.0);
    eval_p(&CriterionForm::new(a, profile.lambda_inf)?, &w.lambda(), &omega)
}
