mod eigenvalue_criteria {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/eigenvalue_criteria.rs"));
}

#[test]
fn eigenvalue_criteria_example_runs() {
    eigenvalue_criteria::run_example().expect("eigenvalue_criteria example should run");
}

mod ellipticity_classes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ellipticity_classes.rs"));
}

#[test]
fn ellipticity_classes_example_runs() {
    ellipticity_classes::run_example().expect("ellipticity_classes example should run");
}

mod equivalence_harness {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/equivalence_harness.rs"));
}

#[test]
fn equivalence_harness_example_runs() {
    equivalence_harness::run_example().expect("equivalence_harness example should run");
}

mod falsify_counterexample {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/falsify_counterexample.rs"));
}

#[test]
fn falsify_counterexample_example_runs() {
    falsify_counterexample::run_example().expect("falsify_counterexample example should run");
}

mod field_files {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/field_files.rs"));
}

#[test]
fn field_files_example_runs() {
    field_files::run_example().expect("field_files example should run");
}

mod integral_functional {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/integral_functional.rs"));
}

#[test]
fn integral_functional_example_runs() {
    integral_functional::run_example().expect("integral_functional example should run");
}

mod kappa_shift {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kappa_shift.rs"));
}

#[test]
fn kappa_shift_example_runs() {
    kappa_shift::run_example().expect("kappa_shift example should run");
}

mod lambda_profile {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/lambda_profile.rs"));
}

#[test]
fn lambda_profile_example_runs() {
    lambda_profile::run_example().expect("lambda_profile example should run");
}

mod ode_boundary {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ode_boundary.rs"));
}

#[test]
fn ode_boundary_example_runs() {
    ode_boundary::run_example().expect("ode_boundary example should run");
}

mod run_config {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/run_config.rs"));
}

#[test]
fn run_config_example_runs() {
    run_config::run_example().expect("run_config example should run");
}

mod symbol_minimum {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/symbol_minimum.rs"));
}

#[test]
fn symbol_minimum_example_runs() {
    symbol_minimum::run_example().expect("symbol_minimum example should run");
}

mod variable_field {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/variable_field.rs"));
}

#[test]
fn variable_field_example_runs() {
    variable_field::run_example().expect("variable_field example should run");
}
