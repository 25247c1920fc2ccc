use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phidiss::cli::{self, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "phidiss", version, about = "Functional dissipativity and ellipticity checks")]
struct Args {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Sample points per axis, or rows of the Lambda table.
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dissipativity verdict; exit 0 strict, 1 dissipative, 2 not, 3 inconclusive.
    Check,
    /// Table of Lambda(t) with a footer carrying Lambda_inf^2.
    Lambda,
    /// Counterexample search from the check witness.
    Falsify,
    /// Ellipticity summary and margin map.
    Report,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(config) = &args.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(cli::EXIT_CONFIG as u8);
    };
    let result = RunConfig::load(config).and_then(|mut cfg| {
        cfg.apply(&Overrides {
            seed: args.seed,
            starts: args.starts,
            grid: args.grid,
            tol: args.tol,
        });
        let out = args.out.as_deref();
        match args.command {
            Command::Check => cli::cmd_check(&cfg, out),
            Command::Lambda => cli::cmd_lambda(&cfg, out),
            Command::Falsify => cli::cmd_falsify(&cfg, out),
            Command::Report => cli::cmd_report(&cfg, out),
        }
    });
    match result {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
