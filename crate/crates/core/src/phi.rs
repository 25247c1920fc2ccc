//! Admissible weight functions φ and the quantities derived from them: the
//! Λ function, its limits, the conjugate weight ψ and the Young pair (Φ, Ψ).
//!
//! Everything is expressed through the log-slope `β(s) = s φ'(s) / φ(s)`:
//! `(s φ)' = φ (1 + β)` and `Λ(s √φ(s)) = -β / (β + 2)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quadrature::adaptive_simpson;

/// Below this end growth rate `dβ/d ln s` a tabulated tail is treated as saturated.
pub const TAIL_GROWTH_MIN: f64 = 1e-3;
/// Bisection stops once the log-bracket is narrower than this.
pub const BISECTION_TOL: f64 = 1e-13;
pub const BISECTION_MAX_ITER: usize = 200;
const LOG_S_LIMIT: f64 = 700.0;

#[derive(Clone, Debug)]
pub enum PhiFamily {
    /// φ(s) = s^(p-2).
    Power { p: f64 },
    Tabulated(Box<TabulatedPhi>),
    /// The conjugate weight ψ of another spec, evaluated exactly through
    /// inversion of `s φ(s)`.
    Conjugate(Arc<PhiSpec>),
}

#[derive(Clone, Debug)]
pub struct PhiSpec {
    pub family: PhiFamily,
    /// Growth exponent near zero: `(s φ)' ≍ s^r` on `(0, s0)`.
    pub r: f64,
    pub s0: f64,
    /// Sign-constancy threshold for φ'.
    pub s1: f64,
}

/// Grid of `(s, φ(s), φ'(s))` with monotone cubic interpolation in `ln s`.
#[derive(Clone, Debug)]
pub struct TabulatedPhi {
    s: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
    phi_interp: Pchip,
    dphi_interp: Pchip,
    head_beta: f64,
    tail_beta: f64,
    tail_growth: f64,
}

impl TabulatedPhi {
    pub fn new(rows: Vec<(f64, f64, f64)>) -> Result<Self> {
        if rows.len() < 4 {
            return Err(Error::InsufficientData {
                needed: 4,
                got: rows.len(),
            });
        }
        for (i, w) in rows.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::MalformedSpec(format!(
                    "grid not strictly increasing at row {}",
                    i + 1
                )));
            }
        }
        for (i, &(s, phi, dphi)) in rows.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::MalformedSpec(format!("row {i}: s must be positive, got {s}")));
            }
            if !(phi > 0.0) || !phi.is_finite() {
                return Err(Error::MalformedSpec(format!("row {i}: non-positive phi value {phi} at s = {s}")));
            }
            if !dphi.is_finite() {
                return Err(Error::MalformedSpec(format!("row {i}: non-finite phi' at s = {s}")));
            }
        }
        let s: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let phi: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let dphi: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let xs: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        let beta = |i: usize| s[i] * dphi[i] / phi[i];
        let n = s.len();
        let head_beta = beta(0);
        let tail_beta = beta(n - 1);
        let slope = (beta(n - 1) - beta(n - 2)) / (xs[n - 1] - xs[n - 2]);
        let tail_growth = if tail_beta >= 0.0 && slope > TAIL_GROWTH_MIN {
            slope
        } else {
            0.0
        };
        Ok(TabulatedPhi {
            phi_interp: Pchip::new(xs.clone(), phi.clone()),
            dphi_interp: Pchip::new(xs, dphi.clone()),
            s,
            phi,
            dphi,
            head_beta,
            tail_beta,
            tail_growth,
        })
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.s.len()).map(|i| (self.s[i], self.phi[i], self.dphi[i]))
    }

    fn ln_phi(&self, s: f64) -> f64 {
        let (lo, hi) = self.s_range();
        if s < lo {
            self.phi[0].ln() + self.head_beta * (s / lo).ln()
        } else if s > hi {
            let l = (s / hi).ln();
            self.phi.last().unwrap().ln() + self.tail_beta * l + 0.5 * self.tail_growth * l * l
        } else {
            self.phi_interp.eval(s.ln()).ln()
        }
    }

    fn beta(&self, s: f64) -> f64 {
        let (lo, hi) = self.s_range();
        if s < lo {
            self.head_beta
        } else if s > hi {
            self.tail_beta + self.tail_growth * (s / hi).ln()
        } else {
            let x = s.ln();
            s * self.dphi_interp.eval(x) / self.phi_interp.eval(x)
        }
    }
}

/// Increasing scalar function solved on `x = ln s`.
fn solve_log(f: impl Fn(f64) -> f64, what: &'static str) -> Result<f64> {
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while f(lo) > 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -LOG_S_LIMIT {
            return Err(Error::NumericFailure {
                what,
                lo: lo.exp(),
                hi: hi.exp(),
            });
        }
    }
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > LOG_S_LIMIT {
            return Err(Error::NumericFailure {
                what,
                lo: lo.exp(),
                hi: hi.exp(),
            });
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BISECTION_TOL {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NumericFailure {
        what,
        lo: lo.exp(),
        hi: hi.exp(),
    })
}

impl PhiSpec {
    /// φ(s) = s^(p-2) with r = p - 2, s0 = 1 and s1 = s0.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::MalformedSpec(format!("power family needs p > 1, got {p}")));
        }
        Ok(PhiSpec {
            family: PhiFamily::Power { p },
            r: p - 2.0,
            s0: 1.0,
            s1: 1.0,
        })
    }

    /// Tabulated weight; `s1` defaults to half the largest tabulated s.
    pub fn tabulated(rows: Vec<(f64, f64, f64)>, r: f64, s0: f64, s1: Option<f64>) -> Result<Self> {
        let tab = TabulatedPhi::new(rows)?;
        let s1 = s1.unwrap_or(0.5 * tab.s_range().1).max(s0);
        if !(r > -1.0) || !(s0 > 0.0) {
            return Err(Error::MalformedSpec(format!("need r > -1 and s0 > 0, got r = {r}, s0 = {s0}")));
        }
        Ok(PhiSpec {
            family: PhiFamily::Tabulated(Box::new(tab)),
            r,
            s0,
            s1,
        })
    }

    /// The spec of ψ, whose growth exponent is `-r/(r+1)`.
    pub fn conjugate(&self) -> Result<PhiSpec> {
        let s0 = self.s0 * self.phi(self.s0);
        let s1 = (self.s1 * self.phi(self.s1)).max(s0);
        Ok(PhiSpec {
            family: PhiFamily::Conjugate(Arc::new(self.clone())),
            r: -self.r / (self.r + 1.0),
            s0,
            s1,
        })
    }

    pub fn ln_phi(&self, s: f64) -> f64 {
        match &self.family {
            PhiFamily::Power { p } => (p - 2.0) * s.ln(),
            PhiFamily::Tabulated(t) => t.ln_phi(s),
            PhiFamily::Conjugate(inner) => {
                let Ok(x) = inner.solve_s_phi(s) else {
                    return f64::NAN;
                };
                x - s.ln()
            }
        }
    }

    pub fn phi(&self, s: f64) -> f64 {
        self.ln_phi(s).exp()
    }

    /// `s φ'(s) / φ(s)`.
    pub fn beta(&self, s: f64) -> f64 {
        match &self.family {
            PhiFamily::Power { p } => p - 2.0,
            PhiFamily::Tabulated(t) => t.beta(s),
            PhiFamily::Conjugate(inner) => {
                let Ok(x) = inner.solve_s_phi(s) else {
                    return f64::NAN;
                };
                let b = inner.beta(x.exp());
                -b / (1.0 + b)
            }
        }
    }

    pub fn dphi(&self, s: f64) -> f64 {
        self.beta(s) * self.phi(s) / s
    }

    /// `(s φ(s))'`.
    pub fn g(&self, s: f64) -> f64 {
        self.phi(s) * (1.0 + self.beta(s))
    }

    /// `ln s` solving `s φ(s) = t`.
    fn solve_s_phi(&self, t: f64) -> Result<f64> {
        let lt = t.ln();
        solve_log(|x| x + self.ln_phi(x.exp()) - lt, "inverse of s*phi(s)")
    }

    /// `ln s` solving `s √φ(s) = t`.
    fn solve_s_sqrt_phi(&self, t: f64) -> Result<f64> {
        let lt = t.ln();
        solve_log(|x| x + 0.5 * self.ln_phi(x.exp()) - lt, "inverse of s*sqrt(phi(s))")
    }

    /// Λ(t), defined through `Λ(s √φ(s)) = -s φ'(s) / (s φ'(s) + 2 φ(s))`.
    pub fn lambda_of_t(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Precondition(format!("lambda_of_t needs t > 0, got {t}")));
        }
        if let PhiFamily::Power { p } = self.family {
            return Ok(2.0 / p - 1.0);
        }
        let s = self.solve_s_sqrt_phi(t)?.exp();
        Ok(lambda_from_beta(self.beta(s)))
    }

    /// ψ(t) = s / t where `s φ(s) = t`.
    pub fn psi_of(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Precondition(format!("psi_of needs t > 0, got {t}")));
        }
        let x = self.solve_s_phi(t)?;
        Ok((x - t.ln()).exp())
    }

    /// Asymptotic β at 0⁺ and at ∞ (the latter may be infinite).
    pub fn beta_limits(&self) -> (f64, f64) {
        match &self.family {
            PhiFamily::Power { p } => (p - 2.0, p - 2.0),
            PhiFamily::Tabulated(t) => {
                let hi = if t.tail_growth > 0.0 {
                    f64::INFINITY
                } else {
                    t.tail_beta
                };
                (t.head_beta, hi)
            }
            PhiFamily::Conjugate(inner) => {
                let (b0, binf) = inner.beta_limits();
                let conj = |b: f64| if b.is_infinite() { -1.0 } else { -b / (1.0 + b) };
                (conj(b0), conj(binf))
            }
        }
    }

    /// (Φ(s), Ψ(s)) with Φ(s) = ∫₀ˢ σφ(σ)dσ and Ψ(s) = ∫₀ˢ σψ(σ)dσ.
    pub fn young_pair(&self, s: f64) -> Result<(f64, f64)> {
        if !(s >= 0.0) {
            return Err(Error::Precondition(format!("young_pair needs s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok((0.0, 0.0));
        }
        // σ = s u⁴ removes the algebraic endpoint singularity of σ^(r+1)
        let big_phi = adaptive_simpson(
            &|u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let sigma = s * u.powi(4);
                sigma * self.phi(sigma) * 4.0 * s * u.powi(3)
            },
            0.0,
            1.0,
            1e-10,
        )?;
        let big_psi = adaptive_simpson(
            &|u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let sigma = s * u.powi(4);
                let psi = self.psi_of(sigma).unwrap_or(f64::NAN);
                sigma * psi * 4.0 * s * u.powi(3)
            },
            0.0,
            1.0,
            1e-10,
        )?;
        Ok((big_phi, big_psi))
    }

    /// Checks conditions (i)–(vi) on a log-spaced grid over
    /// `(s0·1e-6, s1·1e3)`, clipped to the tabulated range.
    pub fn validate(&self, samples: usize) -> Result<ValidationReport> {
        if samples < 64 {
            return Err(Error::Precondition(format!("validate needs at least 64 samples, got {samples}")));
        }
        let (mut lo, mut hi) = (self.s0 * 1e-6, self.s1 * 1e3);
        if let PhiFamily::Tabulated(t) = &self.family {
            let (a, b) = t.s_range();
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if !(hi > lo) {
            return Err(Error::InsufficientData { needed: 2, got: 1 });
        }
        let grid: Vec<f64> = (0..samples)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (samples - 1) as f64).exp())
            .collect();
        let mut phi = Vec::with_capacity(samples);
        let mut beta = Vec::with_capacity(samples);
        for &s in &grid {
            let v = self.phi(s);
            if !(v > 0.0) {
                return Err(Error::MalformedSpec(format!("non-positive phi value {v} at s = {s}")));
            }
            phi.push(v);
            beta.push(self.beta(s));
        }
        let dphi: Vec<f64> = (0..samples).map(|i| beta[i] * phi[i] / grid[i]).collect();
        let g: Vec<f64> = (0..samples).map(|i| phi[i] * (1.0 + beta[i])).collect();
        let first = |pred: &dyn Fn(usize) -> bool| (0..samples).find(|&i| !pred(i));
        let mk = |index: usize, fail: Option<usize>, note: Option<String>| ConditionResult {
            index,
            passed: fail.is_none(),
            first_failure: fail.map(|i| (i, grid[i])),
            note,
        };

        let c1_fail = first(&|i| phi[i].is_finite() && dphi[i].is_finite());
        let c2_fail = first(&|i| g[i] > 0.0);
        let c3_fail = first(&|i| i == 0 || grid[i] * phi[i] > grid[i - 1] * phi[i - 1]);
        let range_note = format!(
            "surjectivity of s*phi(s) checked only on [{:e}, {:e}]",
            grid[0] * phi[0],
            grid[samples - 1] * phi[samples - 1]
        );

        // (iv)
        let near: Vec<usize> = (0..samples).filter(|&i| grid[i] < self.s0).collect();
        let ratios: Vec<f64> = near.iter().map(|&i| g[i] / grid[i].powf(self.r)).collect();
        let c1 = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let c2 = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut phi_plus_zero = None;
        let (c4_fail, c4_note) = if near.is_empty() {
            (Some(0), Some("no samples below s0".to_string()))
        } else if !(c1 > 0.0) || !c2.is_finite() || c2 / c1 > GROWTH_RATIO_MAX {
            // report the sample farthest from the mean log-ratio
            let worst = near
                .iter()
                .zip(&ratios)
                .max_by(|a, b| (a.1 / c1).total_cmp(&(b.1 / c1)))
                .map(|(i, _)| *i)
                .unwrap_or(0);
            (Some(worst), Some(format!("C2/C1 = {:e} exceeds {GROWTH_RATIO_MAX:e}", c2 / c1)))
        } else if self.r.abs() < 1e-12 {
            let i0 = near[0];
            phi_plus_zero = Some(phi[i0]);
            if beta[i0].abs() > 1e-3 {
                (Some(i0), Some("r = 0 requires s*phi'(s) -> 0".to_string()))
            } else {
                (None, None)
            }
        } else {
            (None, None)
        };

        // (v)
        let zero_tol = |i: usize| 1e-14 * phi[i] / grid[i];
        let far: Vec<usize> = (0..samples).filter(|&i| grid[i] >= self.s1).collect();
        let sign = far
            .iter()
            .map(|&i| dphi[i])
            .zip(far.iter())
            .find(|(d, &i)| d.abs() > zero_tol(i))
            .map(|(d, _)| d.signum());
        let c5_fail = match sign {
            None => None,
            Some(sg) => far
                .iter()
                .copied()
                .find(|&i| dphi[i].abs() > zero_tol(i) && dphi[i].signum() != sg),
        };

        // (vi)
        let c6_fail = (1..samples).find(|&i| {
            let (a, b) = (beta[i - 1].abs(), beta[i].abs());
            b < a - 1e-9 * a.max(1.0)
        });

        Ok(ValidationReport {
            conditions: [
                mk(1, c1_fail, None),
                mk(2, c2_fail, None),
                mk(3, c3_fail, Some(range_note)),
                mk(4, c4_fail, c4_note),
                mk(5, c5_fail, None),
                mk(6, c6_fail, None),
            ],
            c1,
            c2,
            phi_plus_zero,
            window: (lo, hi),
            samples,
        })
    }

    /// Λ limits and range along a log-spaced t grid.
    pub fn lambda_profile(&self) -> Result<LambdaProfile> {
        const STEP: f64 = 0.25; // decades
        const CONVERGED: f64 = 1e-10;
        const BOUND_DECADES: f64 = 12.0;
        let mut up = vec![(1.0, self.lambda_of_t(1.0)?)];
        let mut up_converged = false;
        let mut k = 1.0;
        while k * STEP <= BOUND_DECADES {
            let t = 10f64.powf(k * STEP);
            let l = self.lambda_of_t(t)?;
            let prev = up.last().unwrap().1;
            up.push((t, l));
            if (l - prev).abs() < CONVERGED {
                up_converged = true;
                break;
            }
            k += 1.0;
        }
        let mut down = vec![];
        let mut down_converged = false;
        let mut k = 1.0;
        let mut prev = up[0].1;
        while k * STEP <= BOUND_DECADES {
            let t = 10f64.powf(-k * STEP);
            let l = self.lambda_of_t(t)?;
            down.push((t, l));
            if (l - prev).abs() < CONVERGED {
                down_converged = true;
                break;
            }
            prev = l;
            k += 1.0;
        }
        down.reverse();
        let samples: Vec<(f64, f64)> = down.into_iter().chain(up).collect();

        let diffs: Vec<f64> = samples.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let rising = diffs.iter().any(|d| *d > 1e-9);
        let falling = diffs.iter().any(|d| *d < -1e-9);
        if rising && falling {
            return Err(Error::InvariantViolation(
                "sampled Lambda is not monotone (condition (vi) likely violated)".into(),
            ));
        }
        let signs_pos = samples.iter().any(|s| s.1 > 1e-12);
        let signs_neg = samples.iter().any(|s| s.1 < -1e-12);
        if signs_pos && signs_neg {
            return Err(Error::InvariantViolation("sampled Lambda changes sign".into()));
        }

        let (beta0, beta_inf) = self.beta_limits();
        let lambda_zero_limit = if down_converged {
            samples[0].1
        } else {
            lambda_from_beta(beta0)
        };
        let lambda_inf_limit = if up_converged {
            samples.last().unwrap().1
        } else {
            lambda_from_beta(beta_inf)
        };
        let lambda_inf = if lambda_inf_limit.abs() >= lambda_zero_limit.abs() {
            lambda_inf_limit
        } else {
            lambda_zero_limit
        };
        let lambda_inf_sq = lambda_inf * lambda_inf;
        let min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let expected_zero = -self.r / (self.r + 2.0);
        let zero_limit_warning = ((lambda_zero_limit - expected_zero).abs() > 1e-3).then(|| {
            format!("Lambda(0+) = {lambda_zero_limit} differs from -r/(r+2) = {expected_zero}")
        });
        Ok(LambdaProfile {
            spec: Arc::new(self.clone()),
            lambda_zero_limit,
            lambda_inf,
            lambda_inf_sq,
            cond_l: lambda_inf_sq < 1.0,
            range: (min.min(lambda_inf).min(lambda_zero_limit), max.max(lambda_inf).max(lambda_zero_limit)),
            tail_resolved: up_converged && down_converged,
            zero_limit_warning,
            samples,
        })
    }
}

/// Condition (iv) is accepted when the fitted constants satisfy `C2 / C1` at most this.
pub const GROWTH_RATIO_MAX: f64 = 1e3;

pub fn lambda_from_beta(beta: f64) -> f64 {
    if beta.is_infinite() {
        return -beta.signum();
    }
    -beta / (beta + 2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    /// 1..=6 for conditions (i)..(vi).
    pub index: usize,
    pub passed: bool,
    /// (sample index, s) of the first failing sample.
    pub first_failure: Option<(usize, f64)>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub conditions: [ConditionResult; 6],
    pub c1: f64,
    pub c2: f64,
    pub phi_plus_zero: Option<f64>,
    pub window: (f64, f64),
    pub samples: usize,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn first_failed(&self) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| !c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct LambdaProfile {
    pub spec: Arc<PhiSpec>,
    pub lambda_zero_limit: f64,
    /// Signed limit with the largest magnitude.
    pub lambda_inf: f64,
    pub lambda_inf_sq: f64,
    /// `Λ_∞² < 1`.
    pub cond_l: bool,
    /// Interval containing every value of Λ.
    pub range: (f64, f64),
    /// False when a limit came from the tail model rather than a converged grid.
    pub tail_resolved: bool,
    pub zero_limit_warning: Option<String>,
    pub samples: Vec<(f64, f64)>,
}

impl LambdaProfile {
    pub fn lambda_at(&self, t: f64) -> Result<f64> {
        self.spec.lambda_of_t(t)
    }

    /// A profile with constant Λ, for callers that work with a bare Λ value.
    pub fn constant(lambda: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda < 1.0) {
            return Err(Error::Precondition(format!("constant Lambda must lie in (-1, 1), got {lambda}")));
        }
        // Λ = 2/p - 1  =>  p = 2 / (1 + Λ)
        PhiSpec::power(2.0 / (1.0 + lambda))?.lambda_profile()
    }
}
