use approx::assert_relative_eq;
use phidiss::linalg::{CMat, C64};
use phidiss::phi::PhiSpec;
use phidiss::spectral::{min_p, CriterionForm, MinOptions};

fn margin(a: CMat, lambda: f64) -> f64 {
    min_p(&CriterionForm::new(a, lambda).unwrap(), &MinOptions::default())
        .unwrap()
        .margin
}

fn lambda_inf(p: f64) -> f64 {
    PhiSpec::power(p).unwrap().lambda_profile().unwrap().lambda_inf
}

#[test]
fn power_family_lambda_values() {
    assert_relative_eq!(lambda_inf(2.0), 0.0, epsilon = 1e-14);
    assert_relative_eq!(lambda_inf(4.0), -0.5, epsilon = 1e-12);
    assert_relative_eq!(lambda_inf(4.0 / 3.0), 0.5, epsilon = 1e-12);
    assert_relative_eq!(lambda_inf(3.0), -1.0 / 3.0, epsilon = 1e-12);
}

// A scalar coefficient a is L^p-dissipative exactly when
// |p - 2| |Im a| <= 2 sqrt(p - 1) Re a.
#[test]
fn scalar_complex_threshold() {
    for p in [1.5, 3.0, 4.0, 8.0] {
        let lam = lambda_inf(p);
        let edge = 2.0 * (p - 1.0).sqrt() / (p - 2.0).abs();
        let at = |scale: f64| margin(CMat::from_element(1, 1, C64::new(1.0, scale * edge)), lam);
        assert!(at(0.95) > 1e-4, "p = {p}");
        assert!(at(1.05) < -1e-4, "p = {p}");
        assert!(at(1.0).abs() < 1e-7, "p = {p}: {}", at(1.0));
    }
}

// For real symmetric A with eigenvalues mu_1 <= mu_2 > 0 the condition is
// Lambda^2 (mu_1 + mu_2)^2 <= 4 mu_1 mu_2.
#[test]
fn real_symmetric_threshold() {
    for (mu1, mu2) in [(1.0, 16.0), (2.0, 3.0), (0.5, 40.0)] {
        let a = CMat::from_fn(2, 2, |i, j| {
            C64::new(if i != j { 0.0 } else if i == 0 { mu1 } else { mu2 }, 0.0)
        });
        let edge = (4.0 * mu1 * mu2).sqrt() / (mu1 + mu2);
        assert!(margin(a.clone(), 0.95 * edge) > 1e-5);
        assert!(margin(a.clone(), 1.05 * edge) < -1e-5);
        assert!(margin(a, edge).abs() < 1e-7);
    }
}

#[test]
fn identity_margin_is_one_minus_lambda_squared() {
    for lam in [0.0, 0.3, -0.6, 0.9] {
        assert_relative_eq!(margin(CMat::identity(3, 3), lam), 1.0 - lam * lam, epsilon = 1e-9);
    }
}
