// Closed-form criteria for real symmetric coefficients and the matching
// fast-path verdict.

use phidiss::dissipativity::{check_pde_diagonal, check_symmetric_fast, CheckOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::instances;
use phidiss::linalg::RMat;
use phidiss::phi::PhiSpec;
use phidiss::spectral::{product_criterion, strict_symmetric_criterion, symmetric_criterion, EigenSummary};

pub fn run_example() -> phidiss::Result<()> {
    let l2 = 0.25;
    for t in [5.0, 13.0, 14.0] {
        let a = RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, t]);
        let out = symmetric_criterion(&a, l2)?;
        let eig = EigenSummary::of(&a)?;
        let strict = strict_symmetric_criterion(&[eig], l2)?;
        let product = product_criterion(&[eig], l2, Some(t));
        println!(
            "diag(1, {t:>4}): criterion {}, trace/det {:?}, strict margin {:+.5}, product value {:+.5}",
            out.holds, out.trace_det_holds, strict.margin, product.value
        );
    }

    let profile = PhiSpec::power(3.0)?.lambda_profile()?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0); 2], 3)?;
    let mut rng = instances::rng(11);
    let field = CoefficientField::constant_per_h(vec![
        instances::random_spd(&mut rng, 3, 20.0),
        instances::random_spd(&mut rng, 3, 20.0),
    ])?;
    let fast = check_symmetric_fast(&field, &domain, &profile, &CheckOptions::default())?;
    let full = check_pde_diagonal(&field, &domain, &profile, &CheckOptions::default())?;
    println!(
        "random SPD pair, p = 3: fast {:?} (margin {:+.5}), sphere search {:?} (margin {:+.5})",
        fast.status, fast.margin, full.status, full.margin
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
