// The Λ function of a weight φ: constant for powers, drifting for an
// exponential table, and sign-flipped for the conjugate weight.

use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    for p in [1.5, 2.0, 4.0] {
        let profile = PhiSpec::power(p)?.lambda_profile()?;
        println!(
            "p = {p}: Lambda(1) = {:+.6}, Lambda_inf^2 = {:.6}, cond_L = {}",
            profile.lambda_at(1.0)?,
            profile.lambda_inf_sq,
            profile.cond_l
        );
    }

    // φ(s) = e^s tabulated on a log grid; Λ tends to -1 for large t.
    let rows: Vec<(f64, f64, f64)> = (0..400)
        .map(|i| {
            let s = (-8.0 + 12.0 * i as f64 / 399.0f64).exp();
            (s, s.exp(), s.exp())
        })
        .collect();
    let exp_spec = PhiSpec::tabulated(rows, 0.0, 1.0, None)?;
    let profile = exp_spec.lambda_profile()?;
    for t in [0.01, 1.0, 100.0] {
        println!("e^s table: Lambda({t}) = {:+.6}", profile.lambda_at(t)?);
    }
    println!("e^s table: Lambda_inf^2 = {:.6}, cond_L = {}", profile.lambda_inf_sq, profile.cond_l);

    // ψ, the conjugate of φ = s^2: its Λ is the negative of the original one.
    let phi = PhiSpec::power(4.0)?;
    let psi = phi.conjugate()?;
    let report = psi.validate(128)?;
    println!(
        "conjugate of p = 4: r = {:.4}, Lambda(2) = {:+.6}, conditions hold: {}",
        psi.r,
        psi.lambda_of_t(2.0)?,
        report.all_passed()
    );
    let (big_phi, big_psi) = phi.young_pair(1.5)?;
    println!("Young pair at s = 1.5: Phi = {big_phi:.6}, Psi = {big_psi:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
