// Quadrature of the integral form on explicit test functions.

use std::sync::Arc;

use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::linalg::{CMat, CVec, C64};
use phidiss::oracle::{eval_functional_u, eval_functional_v, sqrt_weighted, PolynomialBump, QuadOptions, TestFunction};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    let field = CoefficientField::constant(CMat::identity(1, 1))?;
    let domain = DomainBox::uniform(vec![Interval::new(0.0, 1.0)], 3)?;
    let bump = TestFunction::PolynomialBump(PolynomialBump::simple(
        vec![Interval::new(0.0, 1.0)],
        CVec::from_vec(vec![C64::new(1.0, 0.0)]),
    )?);
    let fine = QuadOptions::with_intervals(1024);
    for (p, exact) in [(2.0, 2.0 / 105.0), (4.0, 1.0 / 70.0)] {
        let profile = PhiSpec::power(p)?.lambda_profile()?;
        let v = eval_functional_v(&field, &domain, &profile, &bump, &fine)?;
        println!("p = {p}: lhs = {:.12} (exact {exact:.12}), rhs = {:.12}", v.lhs, v.rhs);
    }

    let spec = Arc::new(PhiSpec::power(4.0)?);
    let profile = spec.lambda_profile()?;
    let u = eval_functional_u(&field, &domain, &spec, &bump, &QuadOptions::default())?;
    let v = eval_functional_v(&field, &domain, &profile, &sqrt_weighted(bump, spec), &QuadOptions::default())?;
    println!("u-form {:.9} vs v-form {:.9}, ratio {:.6}", u.lhs, v.lhs, u.ratio());
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
