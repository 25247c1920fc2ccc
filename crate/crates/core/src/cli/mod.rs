//! Command implementations behind the `phidiss` binary. Each command returns
//! the text for standard output together with its exit code and writes its
//! primary artifact to `out` when given.

pub mod config;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dissipativity::{check_ode, check_pde_diagonal, margin_map, Verdict, Witness};
use crate::ellipticity::{classify, EllipticityReport};
use crate::oracle::{falsify, Counterexample};
use crate::{Error, Result};

pub use config::{Overrides, RunConfig};

pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_NO_WITNESS: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

/// Exit code for a failed command.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Schema(_)
        | Error::Io(_)
        | Error::MalformedSpec(_)
        | Error::Precondition(_)
        | Error::Shape(_)
        | Error::Index { .. }
        | Error::InsufficientData { .. }
        | Error::EmptyDomain => EXIT_CONFIG,
        _ => EXIT_SOFTWARE,
    }
}

fn to_toml<T: Serialize>(v: &T) -> Result<String> {
    toml::to_string(v).map_err(|e| Error::InvariantViolation(format!("record serialization: {e}")))
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    if let Some(p) = out {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
struct CheckRecord<'a> {
    command: &'static str,
    seed: u64,
    exit_code: i32,
    verdict: &'a Verdict,
}

fn run_check(cfg: &RunConfig) -> Result<Verdict> {
    let field = cfg.field()?;
    let domain = cfg.domain()?;
    let profile = cfg.profile()?;
    if field.n() == 1 {
        check_ode(&field, &domain, &profile, &cfg.check_options())
    } else {
        check_pde_diagonal(&field, &domain, &profile, &cfg.check_options())
    }
}

/// Exit code 0 strict, 1 dissipative, 2 not dissipative, 3 inconclusive.
pub fn cmd_check(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let verdict = run_check(cfg)?;
    let code = verdict.status.exit_code();
    let text = to_toml(&CheckRecord {
        command: "check",
        seed: cfg.options.seed,
        exit_code: code,
        verdict: &verdict,
    })?;
    write_out(out, &text)?;
    Ok(Outcome { code, stdout: text })
}

/// Log-spaced table of `(t, Λ(t), Λ(t)²)` followed by a footer row
/// `inf, Λ_∞, Λ_∞², cond_l=<bool>`.
pub fn cmd_lambda(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let profile = cfg.profile()?;
    let o = &cfg.options;
    if !(o.t_min > 0.0 && o.t_max > o.t_min) || o.lambda_points < 2 {
        return Err(Error::Config(format!(
            "lambda table needs 0 < t_min < t_max and at least 2 points, got [{}, {}] with {}",
            o.t_min, o.t_max, o.lambda_points
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvariantViolation(format!("csv: {e}"));
    w.write_record(["t", "lambda", "lambda_sq", "note"]).map_err(csv_err)?;
    let ratio = (o.t_max / o.t_min).ln();
    for i in 0..o.lambda_points {
        let t = o.t_min * (ratio * i as f64 / (o.lambda_points - 1) as f64).exp();
        let l = profile.lambda_at(t)?;
        w.write_record([fmt(t), fmt(l), fmt(l * l), String::new()]).map_err(csv_err)?;
    }
    w.write_record([
        "inf".to_string(),
        fmt(profile.lambda_inf),
        fmt(profile.lambda_inf_sq),
        format!("cond_l={}", profile.cond_l),
    ])
    .map_err(csv_err)?;
    let bytes = w.into_inner().map_err(|e| Error::InvariantViolation(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::InvariantViolation(e.to_string()))?;
    write_out(out, &text)?;
    Ok(Outcome { code: 0, stdout: text })
}

#[derive(Deserialize)]
struct PriorRecord {
    verdict: Option<PriorVerdict>,
}

#[derive(Deserialize)]
struct PriorVerdict {
    witness: Option<Witness>,
}

#[derive(Serialize)]
struct FalsifyRecord {
    command: &'static str,
    seed: u64,
    found: bool,
    message: String,
    witness_source: &'static str,
    test_function_path: Option<PathBuf>,
    counterexample: Option<Counterexample>,
}

fn no_witness(msg: impl Into<String>) -> Outcome {
    Outcome {
        code: EXIT_NO_WITNESS,
        stdout: format!("{}\n", msg.into()),
    }
}

/// Searches for a test function with a negative integral form. Exit code 0
/// whether or not one is found, 65 when there is no witness to start from.
pub fn cmd_falsify(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let field = cfg.field()?;
    let domain = cfg.domain()?;
    let profile = cfg.profile()?;
    let (found, source) = if field.is_per_h() {
        let (witness, source) = match &cfg.options.witness_path {
            Some(p) => {
                let path = cfg.resolve(p);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let prior: PriorRecord =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                (prior.verdict.and_then(|v| v.witness), "record")
            }
            None => (run_check(cfg)?.witness, "check"),
        };
        let Some(witness) = witness else {
            return Ok(no_witness("no witness available; run check first"));
        };
        (falsify(&field, &domain, &profile, &witness, &cfg.falsify_options())?, source)
    } else {
        let report = classify(&field, &domain, &profile, &cfg.classify_options())?;
        (report.integral.counterexample, "weak form")
    };
    let tf_path = match (&found, &cfg.options.test_function_path, out) {
        (None, _, _) => None,
        (Some(_), Some(p), _) => Some(cfg.resolve(p)),
        (Some(_), None, Some(o)) => Some(o.with_extension("tf.csv")),
        (Some(_), None, None) => None,
    };
    if let (Some(c), Some(p)) = (&found, &tf_path) {
        c.test_function.dump_csv(std::fs::File::create(p)?, cfg.options.dump_points)?;
    }
    let message = match &found {
        Some(c) => format!(
            "counterexample: lhs = {:e}, rhs = {:e} after {} test functions",
            c.value.lhs, c.value.rhs, c.attempts
        ),
        None => "none within budget".to_string(),
    };
    let text = to_toml(&FalsifyRecord {
        command: "falsify",
        seed: cfg.options.seed,
        found: found.is_some(),
        message,
        witness_source: source,
        test_function_path: tf_path,
        counterexample: found,
    })?;
    write_out(out, &text)?;
    Ok(Outcome { code: 0, stdout: text })
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    command: &'static str,
    seed: u64,
    ellipticity: &'a EllipticityReport,
    margin_map: Option<MapBlock>,
}

#[derive(Serialize)]
struct MapBlock {
    csv: String,
}

/// Margin map over the sample grid: coordinates, per-h margins (per-h fields)
/// and the aggregate.
pub fn margin_map_csv(cfg: &RunConfig, report: &EllipticityReport) -> Result<String> {
    let field = cfg.field()?;
    let domain = cfg.domain()?;
    let n = domain.n();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvariantViolation(format!("csv: {e}"));
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    if field.is_per_h() {
        header.extend((1..=field.n()).map(|h| format!("margin_h{h}")));
    }
    header.push("aggregate".into());
    w.write_record(&header).map_err(csv_err)?;
    if field.is_per_h() {
        for pm in margin_map(&field, &domain, &cfg.profile()?, &cfg.check_options())? {
            let row: Vec<String> = pm
                .x
                .iter()
                .chain(&pm.per_h)
                .chain(std::iter::once(&pm.aggregate))
                .map(|&v| fmt(v))
                .collect();
            w.write_record(&row).map_err(csv_err)?;
        }
    } else {
        for x in domain.points() {
            let row: Vec<String> = x.iter().chain(std::iter::once(&report.weak.margin)).map(|&v| fmt(v)).collect();
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvariantViolation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvariantViolation(e.to_string()))
}

/// Ellipticity summary on standard output; the margin-map CSV goes to `out`,
/// or is embedded in the summary when `out` is absent.
pub fn cmd_report(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let field = cfg.field()?;
    let domain = cfg.domain()?;
    let profile = cfg.profile()?;
    let report = classify(&field, &domain, &profile, &cfg.classify_options())?;
    let csv = margin_map_csv(cfg, &report)?;
    write_out(out, &csv)?;
    let text = to_toml(&ReportRecord {
        command: "report",
        seed: cfg.options.seed,
        ellipticity: &report,
        margin_map: out.is_none().then_some(MapBlock { csv }),
    })?;
    Ok(Outcome { code: 0, stdout: text })
}
