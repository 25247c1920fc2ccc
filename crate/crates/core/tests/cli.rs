use std::path::{Path, PathBuf};
use std::process::Command;

const STRICT: &str = r#"
[phi]
family = "power"
p = 3.0

[domain]
bounds = [[0.0, 1.0], [0.0, 1.0]]
counts = [3, 3]

[field]
re = [[[1.0, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 2.0]]]
"#;

const FAILING: &str = r#"
[phi]
family = "power"
p = 4.0

[domain]
bounds = [[0.0, 1.0], [0.0, 1.0]]
counts = [3, 3]

[field]
re = [[[1.0, 0.0], [0.0, 16.0]], [[1.0, 0.0], [0.0, 1.0]]]
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: Option<&Path>) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phidiss"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn check_exit_codes_follow_status() {
    let strict = write_config(&scratch("strict"), STRICT);
    let failing = write_config(&scratch("failing"), FAILING);
    let (code, text) = run(&["check"], Some(&strict));
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("status = \"StrictlyDissipative\""), "{text}");
    let (code, text) = run(&["check"], Some(&failing));
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("[verdict.witness]"), "{text}");
}

#[test]
fn configuration_problems_exit_64() {
    assert_eq!(run(&["check"], None).0, 64);
    let dir = scratch("bad");
    assert_eq!(run(&["check"], Some(&dir.join("missing.toml"))).0, 64);
    let bad = write_config(&dir, &STRICT.replace("family = \"power\"", "family = \"cubic\""));
    assert_eq!(run(&["check"], Some(&bad)).0, 64);
    let typo = write_config(&scratch("typo"), &format!("{STRICT}\n[options]\nstartz = 3\n"));
    assert_eq!(run(&["lambda"], Some(&typo)).0, 64);
}

#[test]
fn falsify_without_witness_exits_65() {
    let dir = scratch("nowitness");
    std::fs::write(dir.join("prior.toml"), "command = \"check\"\nseed = 42\n").unwrap();
    let cfg = write_config(&dir, &format!("{FAILING}\n[options]\nwitness_path = \"prior.toml\"\n"));
    let (code, text) = run(&["falsify"], Some(&cfg));
    assert_eq!(code, 65, "{text}");
}

#[test]
fn lambda_table_ends_with_footer() {
    let cfg = write_config(&scratch("lambda"), STRICT);
    let (code, text) = run(&["lambda", "--grid", "5"], Some(&cfg));
    assert_eq!(code, 0);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "t,lambda,lambda_sq,note");
    let footer: Vec<&str> = lines[6].split(',').collect();
    assert_eq!(footer[0], "inf");
    let l: f64 = footer[1].parse().unwrap();
    assert!((l + 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(footer[3], "cond_l=true");
}

#[test]
fn records_are_byte_identical_across_runs() {
    let dir = scratch("determinism");
    let cfg = write_config(&dir, FAILING);
    let out = dir.join("record.toml");
    let out_arg = out.to_str().unwrap();
    let (c1, a) = run(&["check", "--seed", "7", "--out", out_arg], Some(&cfg));
    let saved = std::fs::read_to_string(&out).unwrap();
    let (c2, b) = run(&["check", "--seed", "7"], Some(&cfg));
    assert_eq!((c1, c2), (2, 2));
    assert_eq!(a, b);
    assert_eq!(saved, a);
}

#[test]
fn falsify_uses_a_saved_witness() {
    let dir = scratch("falsify");
    let cfg = write_config(&dir, FAILING);
    let record = dir.join("check.toml");
    run(&["check", "--out", record.to_str().unwrap()], Some(&cfg));
    let cfg = write_config(&dir, &format!("{FAILING}\n[options]\nwitness_path = \"check.toml\"\n"));
    let out = dir.join("falsify.toml");
    let (code, text) = run(&["falsify", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("found = true"), "{text}");
    assert!(text.contains("witness_source = \"record\""), "{text}");
    assert!(dir.join("falsify.tf.csv").exists());
}

#[test]
fn report_writes_margin_map() {
    let dir = scratch("report");
    let cfg = write_config(&dir, STRICT);
    let out = dir.join("map.csv");
    let (code, text) = run(&["report", "--out", out.to_str().unwrap()], Some(&cfg));
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("[ellipticity]"), "{text}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("x1,x2,margin_h1,margin_h2,aggregate"));
    assert_eq!(csv.lines().count(), 10);
}
