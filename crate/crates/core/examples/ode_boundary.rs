// Dissipativity of `(A u')'` for `A = diag(1, t)` with p = 4. The verdict
// flips at the two roots of `Λ_∞² (1 + t)² = 4t`, namely `t = 7 ± 4√3`.

use phidiss::dissipativity::{check_ode, CheckOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::linalg::{CMat, C64};
use phidiss::phi::PhiSpec;

fn dissipative(t: f64) -> phidiss::Result<bool> {
    let a = CMat::from_fn(2, 2, |i, j| C64::new(if i != j { 0.0 } else if i == 0 { 1.0 } else { t }, 0.0));
    let field = CoefficientField::constant(a)?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 3)?;
    let profile = PhiSpec::power(4.0)?.lambda_profile()?;
    let v = check_ode(&field, &domain, &profile, &CheckOptions::default())?;
    Ok(v.status.is_dissipative())
}

fn bisect(mut inside: f64, mut outside: f64) -> phidiss::Result<f64> {
    while (inside - outside).abs() > 1e-9 {
        let mid = 0.5 * (inside + outside);
        if dissipative(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

pub fn run_example() -> phidiss::Result<()> {
    let lower = bisect(1.0, 0.01)?;
    let upper = bisect(1.0, 100.0)?;
    println!("lower boundary {lower:.9} (exact {:.9})", 7.0 - 4.0 * 3f64.sqrt());
    println!("upper boundary {upper:.9} (exact {:.9})", 7.0 + 4.0 * 3f64.sqrt());
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
