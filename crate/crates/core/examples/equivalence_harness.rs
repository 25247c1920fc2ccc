// Empirical check that rank-one ellipticity of a per-h field matches the
// conjunction of its per-direction strict criteria.

use phidiss::ellipticity::{equivalence_harness, ClassifyOptions};
use phidiss::phi::PhiSpec;

pub fn run_example() -> phidiss::Result<()> {
    for p in [3.0, 4.0] {
        let profile = PhiSpec::power(p)?.lambda_profile()?;
        let r = equivalence_harness(2, 2, &profile, 6, 2024, &ClassifyOptions::default())?;
        println!(
            "p = {p}: {} trials, {} compared, {} in the band, {} disagreements",
            r.trials,
            r.compared,
            r.band_skipped,
            r.disagreements.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
