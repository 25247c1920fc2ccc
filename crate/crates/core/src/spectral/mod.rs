//! The pointwise algebraic forms behind the dissipativity and ellipticity
//! criteria, their minimization over unit spheres, and the eigenvalue
//! shortcuts for real symmetric coefficients.
//!
//! Conventions: `<a, b> = Σ a_i conj(b_i)`; complex vectors are realified as
//! `(Re, Im)` so that `Re<a, b>` becomes the Euclidean dot product.

pub mod sphere;

use crate::error::{Error, Result};
use crate::linalg::{
    cnorm, complexify_vec, inner, sym_eigen, realify_mat, realify_vec, sym, CMat, CVec, RMat, RVec,
};
use sphere::{coordinate_starts, minimize, random_starts, SphereForm};

/// Smallest accepted number of random starts for the sphere searches.
pub const MIN_STARTS: usize = 8;

/// One coefficient matrix together with the Λ value at which the form
/// `P(λ, ω)` is evaluated.
#[derive(Clone, Debug)]
pub struct CriterionForm {
    pub matrix: CMat,
    pub lambda_value: f64,
}

impl CriterionForm {
    pub fn new(matrix: CMat, lambda_value: f64) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::Shape(format!(
                "criterion matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(CriterionForm { matrix, lambda_value })
    }

    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `P(λ, ω) = Re<Aλ,λ> − Λ² Re<Aω,ω> (Re<λ,ω>)² + Λ Re(<Aω,λ> − <Aλ,ω>) Re<λ,ω>`.
pub fn eval_p(form: &CriterionForm, lambda: &CVec, omega: &CVec) -> Result<f64> {
    let m = form.m();
    if lambda.len() != m || omega.len() != m {
        return Err(Error::Shape(format!(
            "vectors of length {} and {} for a {m}x{m} form",
            lambda.len(),
            omega.len()
        )));
    }
    if (cnorm(omega) - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("|omega| = {} is not 1", cnorm(omega))));
    }
    let a = &form.matrix;
    let l = form.lambda_value;
    let al = a * lambda;
    let aw = a * omega;
    let rlw = inner(lambda, omega).re;
    let v = inner(&al, lambda).re - l * l * inner(&aw, omega).re * rlw * rlw
        + l * (inner(&aw, lambda) - inner(&al, omega)).re * rlw;
    Ok(v)
}

/// Realified block form for a tensor `A^{hk}` (n×n blocks of m×m matrices):
///
/// `Σ_{h,k} Re<A^{hk}ξ_k,ξ_h> + Λ Re<(A^{hk} − (A^{kh})*)ω,ξ_h> Re<ω,ξ_k>
///   − Λ² Re<A^{hk}ω,ω> Re<ω,ξ_k> Re<ω,ξ_h>`.
///
/// With n = 1 this is exactly `P(ξ, ω)`.
#[derive(Clone, Debug)]
pub struct TensorForm {
    n: usize,
    m: usize,
    lambda: f64,
    r: Vec<RMat>,
    rb: Vec<RMat>,
    scale: f64,
}

impl TensorForm {
    pub fn new(tensor: &[Vec<CMat>], lambda: f64) -> Result<Self> {
        let n = tensor.len();
        if n == 0 || tensor.iter().any(|row| row.len() != n) {
            return Err(Error::Shape("tensor must be n x n blocks".into()));
        }
        let m = tensor[0][0].nrows();
        for row in tensor {
            for b in row {
                if b.nrows() != m || b.ncols() != m {
                    return Err(Error::Shape(format!(
                        "block {}x{} in a tensor of {m}x{m} blocks",
                        b.nrows(),
                        b.ncols()
                    )));
                }
            }
        }
        let mut r = Vec::with_capacity(n * n);
        let mut rb = Vec::with_capacity(n * n);
        let mut scale: f64 = 0.0;
        for h in 0..n {
            for k in 0..n {
                let a = &tensor[h][k];
                let b = a - tensor[k][h].adjoint();
                let ra = realify_mat(a);
                scale = scale.max(ra.norm());
                r.push(ra);
                rb.push(realify_mat(&b));
            }
        }
        Ok(TensorForm {
            n,
            m,
            lambda,
            r,
            rb,
            scale: scale.max(1e-300),
        })
    }

    pub fn single(a: &CMat, lambda: f64) -> Result<Self> {
        Self::new(&[vec![a.clone()]], lambda)
    }

    fn block(&self, h: usize, k: usize) -> (&RMat, &RMat) {
        (&self.r[h * self.n + k], &self.rb[h * self.n + k])
    }

    /// `zᵀ M(w) z` without assembling `M`.
    pub fn value(&self, z: &RVec, w: &RVec) -> f64 {
        self.matrix(w).dot(&(z * z.transpose()))
    }
}

impl SphereForm for TensorForm {
    fn w_dim(&self) -> usize {
        2 * self.m
    }

    fn z_dim(&self) -> usize {
        2 * self.m * self.n
    }

    fn matrix(&self, w: &RVec) -> RMat {
        let d = 2 * self.m;
        let l = self.lambda;
        let mut full = RMat::zeros(d * self.n, d * self.n);
        let wwt = w * w.transpose();
        for h in 0..self.n {
            for k in 0..self.n {
                let (ra, rb) = self.block(h, k);
                let c = w.dot(&(ra * w));
                let blk = ra + (rb * w) * w.transpose() * l - &wwt * (l * l * c);
                full.view_mut((h * d, k * d), (d, d)).copy_from(&blk);
            }
        }
        sym(&full)
    }

    fn grad_w(&self, z: &RVec, w: &RVec) -> RVec {
        let d = 2 * self.m;
        let l = self.lambda;
        let mut g = RVec::zeros(d);
        let zs: Vec<RVec> = (0..self.n).map(|h| z.rows(h * d, d).into_owned()).collect();
        let wz: Vec<f64> = zs.iter().map(|zh| w.dot(zh)).collect();
        for h in 0..self.n {
            for k in 0..self.n {
                let (ra, rb) = self.block(h, k);
                let (zh, zk) = (&zs[h], &zs[k]);
                let c = w.dot(&(ra * w));
                g += (rb.transpose() * zh) * (l * wz[k]);
                g += zk * (l * zh.dot(&(rb * w)));
                g -= (ra * w + ra.transpose() * w) * (l * l * wz[k] * wz[h]);
                g -= (zk * wz[h] + zh * wz[k]) * (l * l * c);
            }
        }
        g
    }

    fn scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Clone, Debug)]
pub struct MinOptions {
    pub starts: usize,
    pub seed: u64,
    /// Additional ω starting points, e.g. a neighbouring witness.
    pub extra_omegas: Vec<CVec>,
}

impl Default for MinOptions {
    fn default() -> Self {
        MinOptions {
            starts: 16,
            seed: 42,
            extra_omegas: Vec::new(),
        }
    }
}

/// Result of a sphere minimization: the smallest value found and its argmin.
#[derive(Clone, Debug)]
pub struct FormMin {
    pub margin: f64,
    pub lambda: CVec,
    pub omega: CVec,
    pub discarded: usize,
}

fn omega_starts(mats: &[&CMat], opts: &MinOptions) -> Vec<RVec> {
    let d = 2 * mats[0].nrows();
    let mut starts = Vec::new();
    for w in &opts.extra_omegas {
        starts.push(realify_vec(w));
    }
    starts.extend(coordinate_starts(d));
    for a in mats {
        let eig = sym_eigen(&sym(&realify_mat(a)));
        let vecs: Vec<RVec> = (0..d).map(|j| eig.vectors.column(j).into_owned()).collect();
        starts.extend(vecs.iter().cloned());
        // balanced pairs of extreme eigenvectors: the real symmetric optimum
        // mixes the smallest and largest eigen-directions
        for i in 0..d {
            for j in (i + 1)..d {
                if i < 2 && j >= d - 2 {
                    starts.push(&vecs[i] + &vecs[j]);
                    starts.push(&vecs[i] - &vecs[j]);
                }
            }
        }
    }
    starts.extend(random_starts(d, opts.starts, opts.seed));
    starts
}

/// `min P(λ, ω)` over `|λ| = |ω| = 1`.
pub fn min_p(form: &CriterionForm, opts: &MinOptions) -> Result<FormMin> {
    if opts.starts < MIN_STARTS {
        return Err(Error::Precondition(format!(
            "min_p needs at least {MIN_STARTS} random starts, got {}",
            opts.starts
        )));
    }
    let tf = TensorForm::single(&form.matrix, form.lambda_value)?;
    let starts = omega_starts(&[&form.matrix], opts);
    let best = minimize(&tf, &starts).ok_or(Error::NumericFailure {
        what: "min_p: every start diverged",
        lo: f64::NAN,
        hi: f64::NAN,
    })?;
    Ok(FormMin {
        margin: best.value,
        lambda: complexify_vec(&best.z),
        omega: complexify_vec(&best.w),
        discarded: best.discarded,
    })
}

#[derive(Clone, Debug)]
pub struct StrongMin {
    pub margin: f64,
    /// ξ_1..ξ_n.
    pub xi: Vec<CVec>,
    pub omega: CVec,
    /// The Λ value at which the minimum was found.
    pub lambda: f64,
}

/// The 17 interior points plus both endpoints of a Λ interval.
pub fn lambda_sweep(range: (f64, f64)) -> Vec<f64> {
    let (a, b) = range;
    if (b - a).abs() < 1e-15 {
        return vec![a];
    }
    (0..19).map(|i| a + (b - a) * i as f64 / 18.0).collect()
}

/// Direct evaluation of the strong form (no realification).
pub fn eval_strong(tensor: &[Vec<CMat>], lambda: f64, xi: &[CVec], omega: &CVec) -> Result<f64> {
    let n = tensor.len();
    if xi.len() != n {
        return Err(Error::Shape(format!("{} gradient blocks for n = {n}", xi.len())));
    }
    let mut v = 0.0;
    for h in 0..n {
        for k in 0..n {
            let a = &tensor[h][k];
            let b = a - tensor[k][h].adjoint();
            let wk = inner(omega, &xi[k]).re;
            let wh = inner(omega, &xi[h]).re;
            v += inner(&(a * &xi[k]), &xi[h]).re + lambda * inner(&(b * omega), &xi[h]).re * wk
                - lambda * lambda * inner(&(a * omega), omega).re * wk * wh;
        }
    }
    Ok(v)
}

/// Minimum of the strong form over `|ξ| = 1`, `|ω| = 1` and Λ in the sweep of
/// `lambda_range`.
pub fn strong_form_min(tensor: &[Vec<CMat>], lambda_range: (f64, f64), opts: &MinOptions) -> Result<StrongMin> {
    if !(lambda_range.0.abs() <= 1.0 && lambda_range.1.abs() <= 1.0) {
        return Err(Error::Precondition("strong form needs |Lambda| <= 1 over the range".into()));
    }
    if opts.starts < MIN_STARTS {
        return Err(Error::Precondition(format!("need at least {MIN_STARTS} starts")));
    }
    let n = tensor.len();
    let mut best: Option<StrongMin> = None;
    for (li, lam) in lambda_sweep(lambda_range).into_iter().enumerate() {
        let tf = TensorForm::new(tensor, lam)?;
        let diag: Vec<&CMat> = (0..n).map(|h| &tensor[h][h]).collect();
        let mut o = opts.clone();
        o.seed = opts.seed.wrapping_add(li as u64);
        let starts = omega_starts(&diag, &o);
        let Some(found) = minimize(&tf, &starts) else {
            continue;
        };
        if best.as_ref().is_none_or(|b| found.value < b.margin) {
            let d = 2 * tf.m;
            let xi = (0..n)
                .map(|h| complexify_vec(&found.z.rows(h * d, d).into_owned()))
                .collect();
            best = Some(StrongMin {
                margin: found.value,
                xi,
                omega: complexify_vec(&found.w),
                lambda: lam,
            });
        }
    }
    best.ok_or(Error::NumericFailure {
        what: "strong_form_min: every start diverged",
        lo: lambda_range.0,
        hi: lambda_range.1,
    })
}

/// `B(q) = Σ A^{hk} q_h q_k`.
pub fn contract(tensor: &[Vec<CMat>], q: &[f64]) -> Result<CMat> {
    let n = tensor.len();
    if q.len() != n {
        return Err(Error::Shape(format!("q has length {} for n = {n}", q.len())));
    }
    let m = tensor[0][0].nrows();
    let mut b = CMat::zeros(m, m);
    for h in 0..n {
        for k in 0..n {
            b += &tensor[h][k] * crate::linalg::C64::new(q[h] * q[k], 0.0);
        }
    }
    Ok(b)
}

/// `min P` of the contracted matrix `B(q)`, normalized by `|q|²`.
pub fn weak_form_min(tensor: &[Vec<CMat>], q: &[f64], lambda: f64, opts: &MinOptions) -> Result<FormMin> {
    let q2: f64 = q.iter().map(|v| v * v).sum();
    if !(q2 > 0.0) {
        return Err(Error::Precondition("weak form needs q != 0".into()));
    }
    let b = contract(tensor, q)?;
    let mut r = min_p(&CriterionForm::new(b, lambda)?, opts)?;
    r.margin /= q2;
    Ok(r)
}

/// Spectral data of one real symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSummary {
    pub mu_min: f64,
    pub mu_max: f64,
    pub trace: f64,
    /// Only for 2x2 matrices.
    pub det: Option<f64>,
}

impl EigenSummary {
    pub fn of(a: &RMat) -> Result<Self> {
        check_symmetric(a)?;
        let e = sym_eigen(a);
        let det = (a.nrows() == 2).then(|| a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]);
        Ok(EigenSummary {
            mu_min: e.min(),
            mu_max: e.max(),
            trace: a.trace(),
            det,
        })
    }
}

fn check_symmetric(a: &RMat) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::Shape("expected a non-empty square matrix".into()));
    }
    let scale = a.amax().max(1.0);
    if (a - a.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Precondition("matrix is not symmetric within 1e-12".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricOutcome {
    /// `Λ_∞² (μ₁ + μ_m)² ≤ 4 μ₁ μ_m`.
    pub holds: bool,
    /// μ₁ ≤ 0: the positivity requirement fails and so does the criterion.
    pub fails_positivity: bool,
    /// For 2x2 input, the trace/determinant form of the same inequality.
    pub trace_det_holds: Option<bool>,
}

/// Eigenvalue criterion for real symmetric positive definite coefficients.
pub fn symmetric_criterion(a: &RMat, lambda_inf_sq: f64) -> Result<SymmetricOutcome> {
    let e = EigenSummary::of(a)?;
    if e.mu_min <= 0.0 {
        return Ok(SymmetricOutcome {
            holds: false,
            fails_positivity: true,
            trace_det_holds: None,
        });
    }
    let lhs = lambda_inf_sq * (e.mu_min + e.mu_max).powi(2);
    let rhs = 4.0 * e.mu_min * e.mu_max;
    let tol = 1e-12 * rhs.abs().max(lhs.abs());
    let holds = lhs <= rhs + tol;
    let trace_det_holds = e.det.map(|det| {
        let l2 = lambda_inf_sq * e.trace * e.trace;
        let r2 = 4.0 * det;
        l2 <= r2 + 1e-12 * l2.abs().max(r2.abs())
    });
    Ok(SymmetricOutcome {
        holds,
        fails_positivity: false,
        trace_det_holds,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrictOutcome {
    pub holds: bool,
    /// `min [(1+c) μ₁ − (1−c) μ_m]` with `c = √(1 − Λ_∞²)`.
    pub margin: f64,
    /// `min [c tr A − √((tr A)² − 4 det A)]`, 2x2 input only.
    pub trace_det_margin: Option<f64>,
}

/// Strictness criterion from the smallest and largest eigenvalues.
pub fn strict_symmetric_criterion(eigs: &[EigenSummary], lambda_inf_sq: f64) -> Result<StrictOutcome> {
    if !(lambda_inf_sq < 1.0) {
        return Err(Error::UnsupportedRegime(format!(
            "strict criterion needs Lambda_inf^2 < 1, got {lambda_inf_sq}"
        )));
    }
    let c = (1.0 - lambda_inf_sq).sqrt();
    let margin = eigs
        .iter()
        .map(|e| (1.0 + c) * e.mu_min - (1.0 - c) * e.mu_max)
        .fold(f64::INFINITY, f64::min);
    let trace_det_margin = if !eigs.is_empty() && eigs.iter().all(|e| e.det.is_some()) {
        Some(
            eigs.iter()
                .map(|e| {
                    let det = e.det.unwrap();
                    c * e.trace - (e.trace * e.trace - 4.0 * det).max(0.0).sqrt()
                })
                .fold(f64::INFINITY, f64::min),
        )
    } else {
        None
    };
    Ok(StrictOutcome {
        holds: margin > 0.0,
        margin,
        trace_det_margin,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductOutcome {
    /// `min [μ₁ μ_m − (Λ_∞²/2)(μ₁ + μ_m)²]`.
    pub value: f64,
    pub necessary_holds: bool,
    /// Requires a finite `sup μ_m` in addition.
    pub sufficient_holds: bool,
    /// The necessary condition holds but boundedness is unknown.
    pub inconclusive: bool,
}

pub fn product_criterion(eigs: &[EigenSummary], lambda_inf_sq: f64, sup_mu_max: Option<f64>) -> ProductOutcome {
    let value = eigs
        .iter()
        .map(|e| e.mu_min * e.mu_max - 0.5 * lambda_inf_sq * (e.mu_min + e.mu_max).powi(2))
        .fold(f64::INFINITY, f64::min);
    let necessary_holds = value > 0.0;
    let bounded = sup_mu_max.is_some_and(f64::is_finite);
    ProductOutcome {
        value,
        necessary_holds,
        sufficient_holds: necessary_holds && bounded,
        inconclusive: necessary_holds && !bounded,
    }
}
