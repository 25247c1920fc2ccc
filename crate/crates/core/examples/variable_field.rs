// A coefficient that varies in space: `A(x) = diag(1, 1 + x²)` with p = 4
// loses dissipativity where `1 + x²` passes `7 + 4√3`.

use phidiss::dissipativity::{check_ode, margin_map, CheckOptions};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::linalg::{CMat, C64};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    let field = CoefficientField::callback(
        2,
        1,
        |x| {
            let d = [1.0, 1.0 + x[0] * x[0]];
            vec![CMat::from_fn(2, 2, |i, j| C64::new(if i == j { d[i] } else { 0.0 }, 0.0))]
        },
        false,
    )?;
    let domain = DomainBox::new(vec![Interval::new(0.0, 5.0)], vec![21])?;
    let profile = PhiSpec::power(4.0)?.lambda_profile()?;
    let opts = CheckOptions::default();
    let map = margin_map(&field, &domain, &profile, &opts)?;
    let crossing = map.windows(2).find(|w| w[0].aggregate >= 0.0 && w[1].aggregate < 0.0);
    if let Some(w) = crossing {
        println!(
            "margin changes sign between x = {} and x = {} (exact {:.6})",
            w[0].x[0],
            w[1].x[0],
            (6.0 + 4.0 * 3f64.sqrt()).sqrt()
        );
    }
    let v = check_ode(&field, &domain, &profile, &opts)?;
    let w = v.witness.as_ref().expect("verdicts carry a witness");
    println!("verdict {:?}, worst margin {:+.5} at x = {:?}", v.status, v.margin, w.x);
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
