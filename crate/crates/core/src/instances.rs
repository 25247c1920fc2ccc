//! Seeded random coefficient generators for property tests and experiments.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::CoefficientField;
use crate::linalg::{CMat, RMat, C64};
use crate::Result;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut InstanceRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Orthogonal factor of a QR decomposition of a matrix with uniform entries.
pub fn random_orthogonal(rng: &mut InstanceRng, m: usize) -> RMat {
    loop {
        let g = RMat::from_fn(m, m, |_, _| uniform(rng, -1.0, 1.0));
        if g.determinant().abs() > 1e-3 {
            return g.qr().q();
        }
    }
}

/// Real symmetric positive definite matrix `Q diag(μ) Qᵀ` with eigenvalues
/// log-uniform in `[1, cond]`.
pub fn random_spd(rng: &mut InstanceRng, m: usize, cond: f64) -> CMat {
    let q = random_orthogonal(rng, m);
    let mu = RMat::from_fn(m, m, |i, j| {
        if i == j {
            (cond.ln() * rng.random::<f64>()).exp()
        } else {
            0.0
        }
    });
    let a = &q * mu * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    a.map(|v| C64::new(v, 0.0))
}

/// `I + spread · G` with `G` a complex matrix with entries uniform in the unit square.
pub fn random_near_identity(rng: &mut InstanceRng, m: usize, spread: f64) -> CMat {
    CMat::from_fn(m, m, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        C64::new(d + spread * uniform(rng, -1.0, 1.0), spread * uniform(rng, -1.0, 1.0))
    })
}

pub fn random_per_h(rng: &mut InstanceRng, m: usize, n: usize, spread: f64) -> Result<CoefficientField> {
    CoefficientField::constant_per_h((0..n).map(|_| random_near_identity(rng, m, spread)).collect())
}

/// Tensor `δ^{hk} I + spread · G^{hk}`.
pub fn random_tensor(rng: &mut InstanceRng, m: usize, n: usize, spread: f64) -> Result<CoefficientField> {
    let tensor = (0..n)
        .map(|h| {
            (0..n)
                .map(|k| {
                    if h == k {
                        random_near_identity(rng, m, spread)
                    } else {
                        random_near_identity(rng, m, spread) - CMat::identity(m, m)
                    }
                })
                .collect()
        })
        .collect();
    CoefficientField::constant_tensor(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_and_spd() {
        let mut r = rng(7);
        let q = random_orthogonal(&mut r, 4);
        assert!((&q * q.transpose() - RMat::identity(4, 4)).norm() < 1e-12);
        let a = random_spd(&mut r, 3, 100.0);
        let re = a.map(|z| z.re);
        let eig = crate::linalg::sym_eigen(&re);
        assert!(eig.min() >= 1.0 - 1e-9 && eig.max() <= 100.0 + 1e-9);
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_near_identity(&mut rng(3), 3, 0.5);
        let b = random_near_identity(&mut rng(3), 3, 0.5);
        assert_eq!(a, b);
    }
}
