// The strictness constant: the largest κ with `A − κI` still dissipative.

use phidiss::dissipativity::{check_pde_diagonal, supremal_kappa, CheckOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::linalg::{CMat, C64};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    let profile = PhiSpec::power(4.0)?.lambda_profile()?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 3)?;
    let opts = CheckOptions::default();
    for d in [[1.0, 1.0], [1.0, 4.0], [1.0, 16.0]] {
        let a = CMat::from_fn(2, 2, |i, j| C64::new(if i == j { d[i] } else { 0.0 }, 0.0));
        let field = CoefficientField::constant(a)?;
        let v = check_pde_diagonal(&field, &domain, &profile, &opts)?;
        let k = supremal_kappa(&field, &domain, &profile, &opts)?;
        println!(
            "diag({}, {}): {:?}, kappa estimate {:.6}, supremal shift {:?}",
            d[0], d[1], v.status, v.kappa, k
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
