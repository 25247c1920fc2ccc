// Direct use of the pointwise form `P(λ, ω)` and its sphere minimum.

use phidiss::linalg::{CMat, CVec, C64};
use phidiss::spectral::{eval_p, min_p, CriterionForm, MinOptions};

pub fn run_example() -> phidiss::Result<()> {
    for l2 in [0.0, 1.0 / 9.0, 0.25, 0.81] {
        let form = CriterionForm::new(CMat::identity(3, 3), -f64::sqrt(l2))?;
        let r = min_p(&form, &MinOptions::default())?;
        println!("identity, Lambda^2 = {l2:.4}: min P = {:.10} (1 - Lambda^2 = {:.10})", r.margin, 1.0 - l2);
    }

    // A rotation-like matrix with a skew part: the minimizer is a genuinely
    // complex pair.
    let a = CMat::from_row_slice(
        2,
        2,
        &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -0.3), C64::new(1.0, 0.5)],
    );
    let form = CriterionForm::new(a, -0.5)?;
    let r = min_p(&form, &MinOptions::default())?;
    let again = eval_p(&form, &r.lambda, &r.omega)?;
    println!("complex example: min P = {:.10}, re-evaluated {:.10}", r.margin, again);
    let e1 = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    println!("P(e1, e1) = {:.6}", eval_p(&form, &e1, &e1)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
