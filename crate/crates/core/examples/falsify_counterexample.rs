// From an algebraic witness to a concrete test function whose integral
// form is negative.

use phidiss::dissipativity::{check_ode, CheckOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::linalg::{CMat, C64};
use phidiss::oracle::{falsify, FalsifyOptions};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    let profile = PhiSpec::power(4.0)?.lambda_profile()?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 3)?;
    for d in [[1.0, 16.0], [1.0, 1.0]] {
        let a = CMat::from_fn(2, 2, |i, j| C64::new(if i == j { d[i] } else { 0.0 }, 0.0));
        let field = CoefficientField::constant(a)?;
        let v = check_ode(&field, &domain, &profile, &CheckOptions::default())?;
        let w = v.witness.as_ref().expect("verdicts carry a witness");
        match falsify(&field, &domain, &profile, w, &FalsifyOptions::default())? {
            Some(c) => println!(
                "diag({}, {}): {} with mu = {:?}, cutoff = {:?}: lhs = {:.4e}, rhs = {:.4e}",
                d[0], d[1], c.kind, c.mu, c.cutoff, c.value.lhs, c.value.rhs
            ),
            None => println!("diag({}, {}): none within budget ({:?})", d[0], d[1], v.status),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
