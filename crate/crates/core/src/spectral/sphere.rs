//! Minimization of `λ_min(M(w))` over the unit sphere in `w`.
//!
//! For fixed `w` the inner minimum over the unit `z`-sphere of the quadratic
//! form `zᵀ M(w) z` is the smallest eigenvalue of `M(w)`; the outer problem
//! is non-convex and handled by multi-start projected gradient descent. The
//! gradient is `∇_w (zᵀ M(w) z)` at the current eigenvector (envelope
//! theorem), exact whenever the smallest eigenvalue is simple.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{sym_eigen, RMat, RVec};

pub trait SphereForm: Sync {
    fn w_dim(&self) -> usize;
    fn z_dim(&self) -> usize;
    /// Symmetric `M(w)`.
    fn matrix(&self, w: &RVec) -> RMat;
    /// `∇_w zᵀ M(w) z`.
    fn grad_w(&self, z: &RVec, w: &RVec) -> RVec;
    /// Typical magnitude of the form, used for relative stopping tests.
    fn scale(&self) -> f64;
}

#[derive(Clone, Debug)]
pub struct SphereMin {
    pub value: f64,
    pub z: RVec,
    pub w: RVec,
    pub start_index: usize,
    /// Starts that produced a non-finite value and were dropped.
    pub discarded: usize,
}

const MAX_ITER: usize = 400;
/// Iterations every start gets before the best [`REFINE`] are descended fully.
const SCREEN_ITER: usize = 25;
const REFINE: usize = 4;
const ARMIJO: f64 = 1e-4;

pub fn inner_min(form: &dyn SphereForm, w: &RVec) -> (f64, RVec) {
    let eig = sym_eigen(&form.matrix(w));
    (eig.min(), eig.min_vector())
}

fn tangent(g: &RVec, w: &RVec) -> RVec {
    g - w * g.dot(w)
}

/// Final value, `z` and `w` of one descent run.
type Descent = (f64, RVec, RVec);

fn descend(form: &dyn SphereForm, w0: &RVec, max_iter: usize) -> Option<Descent> {
    let norm = w0.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let scale = form.scale().max(1e-300);
    let mut w = w0 / norm;
    let (mut f, mut z) = inner_min(form, &w);
    if !f.is_finite() {
        return None;
    }
    let mut gt = tangent(&form.grad_w(&z, &w), &w);
    let mut alpha = 0.5 / scale;
    let mut stalled = 0;
    for _ in 0..max_iter {
        let gn2 = gt.norm_squared();
        if gn2.sqrt() <= 1e-14 * scale {
            break;
        }
        let mut accepted = None;
        let mut a = alpha;
        for _ in 0..60 {
            let cand = &w - &gt * a;
            let cand = &cand / cand.norm();
            let (fc, zc) = inner_min(form, &cand);
            if fc.is_finite() && fc <= f - ARMIJO * a * gn2 {
                accepted = Some((cand, fc, zc, a));
                break;
            }
            a *= 0.5;
        }
        let Some((wn, fnew, zn, a_used)) = accepted else {
            break;
        };
        let gtn = tangent(&form.grad_w(&zn, &wn), &wn);
        // Barzilai–Borwein step for the next iteration
        let s = &wn - &w;
        let y = &gtn - &gt;
        let sy = s.dot(&y);
        alpha = if sy > 0.0 {
            (s.norm_squared() / sy).min(1e3 / scale)
        } else {
            (2.0 * a_used).min(1e3 / scale)
        };
        let gain = f - fnew;
        w = wn;
        z = zn;
        f = fnew;
        gt = gtn;
        if gt.norm() <= 1e-9 * scale && gain <= 1e-17 * scale {
            break;
        }
        // round-off level progress three times in a row
        stalled = if gain <= 8.0 * f64::EPSILON * (f.abs() + scale) { stalled + 1 } else { 0 };
        if stalled >= 3 {
            break;
        }
    }
    Some((f, z, w))
}

/// Best local minimum over the given starts. Ties keep the lowest start index,
/// so the result does not depend on thread scheduling.
pub fn minimize(form: &dyn SphereForm, starts: &[RVec]) -> Option<SphereMin> {
    let screened: Vec<Option<(f64, RVec, RVec)>> =
        starts.par_iter().map(|w0| descend(form, w0, SCREEN_ITER)).collect();
    let discarded = screened.iter().filter(|r| r.is_none()).count();
    let mut order: Vec<usize> = (0..starts.len()).filter(|&i| screened[i].is_some()).collect();
    order.sort_by(|&a, &b| {
        let va = screened[a].as_ref().map_or(f64::INFINITY, |r| r.0);
        let vb = screened[b].as_ref().map_or(f64::INFINITY, |r| r.0);
        va.total_cmp(&vb).then(a.cmp(&b))
    });
    order.truncate(REFINE);
    order.sort_unstable();
    let results: Vec<(usize, Option<Descent>)> = order
        .par_iter()
        .map(|&i| {
            let w = &screened[i].as_ref().expect("screened start").2;
            (i, descend(form, w, MAX_ITER))
        })
        .collect();
    let mut best: Option<SphereMin> = None;
    for (i, r) in results {
        if let Some((value, z, w)) = r {
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(SphereMin {
                    value,
                    z,
                    w,
                    start_index: i,
                    discarded,
                });
            }
        }
    }
    best
}

/// `count` Gaussian directions from a seeded ChaCha stream.
pub fn random_starts(dim: usize, count: usize, seed: u64) -> Vec<RVec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            RVec::from_fn(dim, |_, _| {
                let u1: f64 = 1.0 - rng.random::<f64>();
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
        })
        .collect()
}

pub fn coordinate_starts(dim: usize) -> Vec<RVec> {
    (0..dim)
        .map(|i| RVec::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 }))
        .collect()
}
