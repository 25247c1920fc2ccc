// The command layer driven from an in-memory configuration.

use std::path::Path;

use phidiss::cli::{cmd_check, cmd_lambda, RunConfig};

const CONFIG: &str = r#"
[phi]
family = "power"
p = 4

[domain]
bounds = [[0.0, 1.0], [0.0, 1.0]]
counts = [3, 3]

[field]
kind = "per_h"
re = [[[1, 0], [0, 16]], [[1, 0], [0, 1]]]

[options]
lambda_points = 5
"#;

pub fn run_example() -> phidiss::Result<()> {
    let cfg = RunConfig::from_str(CONFIG, Path::new("."))?;
    let check = cmd_check(&cfg, None)?;
    println!("check exit code {}\n{}", check.code, check.stdout);
    let table = cmd_lambda(&cfg, None)?;
    println!("{}", table.stdout);
    Ok(())
}

#[allow(dead_code)]
fn main() -> phidiss::Result<()> {
    run_example()
}
