// Strong, integral and weak ellipticity side by side.

use phidiss::ellipticity::{classify, classify_tensor, ClassifyOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::instances;
use phidiss::linalg::{CMat, C64};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    let profile = PhiSpec::power(4.0)?.lambda_profile()?;
    let opts = ClassifyOptions::default();

    let identity: Vec<Vec<CMat>> = (0..2)
        .map(|h| (0..2).map(|k| if h == k { CMat::identity(2, 2) } else { CMat::zeros(2, 2) }).collect())
        .collect();
    let r = classify_tensor(identity, &profile, &opts)?;
    println!(
        "identity tensor: strong {:?} ({:.6}), integral {:?}, weak {:?} ({:.6})",
        r.strong.holds, r.strong.kappa, r.integral.holds, r.weak.holds, r.weak.kappa
    );

    let bad = CMat::from_fn(2, 2, |i, j| C64::new(if i != j { 0.0 } else if i == 0 { 1.0 } else { 16.0 }, 0.0));
    let field = CoefficientField::constant_per_h(vec![CMat::identity(2, 2), bad])?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0); 2], 3)?;
    let r = classify(&field, &domain, &profile, &opts)?;
    println!(
        "per-h with diag(1, 16): strong {:?}, integral {:?}, weak {:?} at q = {:?}",
        r.strong.holds, r.integral.holds, r.weak.holds, r.weak.witness.q
    );

    let tensor = instances::random_tensor(&mut instances::rng(5), 2, 2, 1.2)?;
    let r = classify(&tensor, &domain, &profile, &opts)?;
    println!(
        "random coupled tensor: strong {:?} ({:+.4}), integral {:?} via {:?}, weak {:?} ({:+.4}), consistent {}",
        r.strong.holds,
        r.strong.margin,
        r.integral.holds,
        r.integral.basis,
        r.weak.holds,
        r.weak.margin,
        r.consistency.ok()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
