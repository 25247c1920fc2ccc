//! Acceptance run: one PASS/FAIL line per criterion, each with its runtime
//! budget. Exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use phidiss::dissipativity::{check_ode, check_pde_diagonal, check_symmetric_fast, supremal_kappa, CheckOptions, Status};
use phidiss::ellipticity::{classify, equivalence_harness, ClassifyOptions, Tri};
use phidiss::field::{CoefficientField, DomainBox, Interval};
use phidiss::instances::{self, InstanceRng};
use phidiss::linalg::{CMat, CVec, RMat, C64};
use phidiss::oracle::{eval_functional_v, falsify, BumpTerm, FalsifyOptions, PolynomialBump, QuadOptions, TestFunction};
use phidiss::phi::{LambdaProfile, PhiSpec};
use phidiss::spectral::{min_p, CriterionForm, MinOptions};
use rand::RngExt;

type Outcome = Result<String, String>;

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn profile(p: f64) -> LambdaProfile {
    PhiSpec::power(p).and_then(|s| s.lambda_profile()).expect("power profile")
}

fn unit_box(n: usize) -> DomainBox {
    DomainBox::uniform(vec![Interval::new(0.0, 1.0); n], 3).expect("unit box")
}

fn diag(v: &[f64]) -> CMat {
    CMat::from_fn(v.len(), v.len(), |i, j| C64::new(if i == j { v[i] } else { 0.0 }, 0.0))
}

/// `Q diag(mu) Qᵀ` for a random orthogonal `Q`.
fn rotated(rng: &mut InstanceRng, mu: &[f64]) -> CMat {
    let m = mu.len();
    let q = instances::random_orthogonal(rng, m);
    let a = &q * RMat::from_diagonal(&nalgebra::DVector::from_column_slice(mu)) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    a.map(|v| C64::new(v, 0.0))
}

/// Largest admissible eigenvalue ratio `(1 + c)/(1 − c)` with `c = √(1 − Λ²)`.
fn boundary_ratio(l2: f64) -> f64 {
    let c = (1.0 - l2).sqrt();
    (1.0 + c) / (1.0 - c)
}

fn lambda_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0, 4.0, 10.0] {
        let spec = PhiSpec::power(p).map_err(e2s)?;
        for i in 0..50 {
            let t = 10f64.powf(-6.0 + 12.0 * i as f64 / 49.0);
            let l = spec.lambda_of_t(t).map_err(e2s)?;
            worst = worst.max((l - (2.0 / p - 1.0)).abs());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} > 1e-10"))
    }
}

fn boundary_reproduction() -> Outcome {
    let prof = profile(4.0);
    let dom = unit_box(1);
    let opts = CheckOptions::default();
    let ok = |t: f64| -> Result<bool, String> {
        let f = CoefficientField::constant(diag(&[1.0, t])).map_err(e2s)?;
        Ok(check_ode(&f, &dom, &prof, &opts).map_err(e2s)?.status.is_dissipative())
    };
    let bisect = |mut inside: f64, mut outside: f64| -> Result<f64, String> {
        while (inside - outside).abs() > 1e-9 {
            let mid = 0.5 * (inside + outside);
            if ok(mid)? {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(0.5 * (inside + outside))
    };
    let lo = bisect(1.0, 1e-3)?;
    let hi = bisect(1.0, 1e3)?;
    let (elo, ehi) = (7.0 - 4.0 * 3f64.sqrt(), 7.0 + 4.0 * 3f64.sqrt());
    let err = (lo - elo).abs().max((hi - ehi).abs());
    let msg = format!("roots {lo:.9}, {hi:.9}; error {err:.2e}");
    if err <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn identity_margin() -> Outcome {
    let mut worst: f64 = 0.0;
    for l2 in [0.0, 1.0 / 9.0, 0.25, 0.81] {
        for sign in [-1.0, 1.0] {
            for m in [2, 3] {
                let form = CriterionForm::new(CMat::identity(m, m), sign * f64::sqrt(l2)).map_err(e2s)?;
                let r = min_p(&form, &MinOptions::default()).map_err(e2s)?;
                worst = worst.max((r.margin - (1.0 - l2)).abs());
            }
        }
    }
    if worst <= 1e-8 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} > 1e-8"))
    }
}

fn fast_path_agreement() -> Outcome {
    let mut rng = instances::rng(4);
    let opts = CheckOptions::default();
    let (mut compared, mut skipped, mut disagreements) = (0, 0, 0);
    for i in 0..200 {
        let m = 2 + i % 3;
        let n = 1 + (i / 3) % 2;
        let p = [3.0, 4.0][i % 2];
        let prof = profile(p);
        let cond = 1.5 * boundary_ratio(prof.lambda_inf_sq);
        let mats: Vec<CMat> = (0..n)
            .map(|_| {
                let mu: Vec<f64> = (0..m).map(|_| (cond.ln() * rng.random::<f64>()).exp()).collect();
                rotated(&mut rng, &mu)
            })
            .collect();
        let field = CoefficientField::constant_per_h(mats).map_err(e2s)?;
        let dom = unit_box(n);
        let fast = check_symmetric_fast(&field, &dom, &prof, &opts).map_err(e2s)?;
        if fast.margin.abs() <= 1e-6 {
            skipped += 1;
            continue;
        }
        let full = check_pde_diagonal(&field, &dom, &prof, &opts).map_err(e2s)?;
        compared += 1;
        if fast.status.is_dissipative() != full.status.is_dissipative() {
            disagreements += 1;
        }
    }
    let msg = format!("{compared} compared, {skipped} near zero, {disagreements} disagreements");
    if disagreements == 0 && compared > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_bump(rng: &mut InstanceRng, m: usize, n: usize) -> Result<TestFunction, String> {
    let support = (0..n)
        .map(|_| {
            let a = 0.5 * rng.random::<f64>();
            let b = a + 0.1 + (0.9 - a) * rng.random::<f64>();
            Interval::new(a, b.min(1.0))
        })
        .collect();
    let terms = (0..1 + rng.random_range(0..3))
        .map(|_| BumpTerm {
            coeff: CVec::from_fn(m, |_, _| {
                C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)
            }),
            powers: (0..n).map(|_| rng.random_range(0..3)).collect(),
        })
        .collect();
    Ok(TestFunction::PolynomialBump(PolynomialBump::new(support, terms).map_err(e2s)?))
}

fn oracle_agreement() -> Outcome {
    let mut rng = instances::rng(5);
    let opts = CheckOptions::default();
    let fine = QuadOptions {
        intervals: 128,
        check_convergence: false,
        ..QuadOptions::default()
    };
    let (mut strict, mut violated, mut other, mut contradictions) = (0, 0, 0, Vec::new());
    for i in 0..100 {
        let m = 1 + i % 3;
        let n = 1 + (i / 3) % 2;
        let p = [3.0, 4.0][i % 2];
        let prof = profile(p);
        let spread = 0.2 + 1.0 * rng.random::<f64>();
        let field = instances::random_per_h(&mut rng, m, n, spread).map_err(e2s)?;
        let dom = unit_box(n);
        let v = check_pde_diagonal(&field, &dom, &prof, &opts).map_err(e2s)?;
        if v.status == Status::StrictlyDissipative && v.margin > 1e-3 {
            strict += 1;
            for _ in 0..50 {
                let bump = random_bump(&mut rng, m, n)?;
                let val = eval_functional_v(&field, &dom, &prof, &bump, &QuadOptions::default())
                    .or_else(|_| eval_functional_v(&field, &dom, &prof, &bump, &fine))
                    .map_err(e2s)?;
                if val.lhs < -1e-6 * val.rhs {
                    contradictions.push(format!("instance {i}: bump lhs {:.3e}", val.lhs));
                }
            }
        } else if v.status == Status::NotDissipative && v.margin < -1e-3 {
            violated += 1;
            let w = v.witness.as_ref().ok_or("verdict without witness")?;
            let found = falsify(&field, &dom, &prof, w, &FalsifyOptions::default()).map_err(e2s)?;
            match found {
                Some(c) if c.value.lhs < 0.0 => {}
                _ => contradictions.push(format!("instance {i}: no counterexample, margin {:.3e}", v.margin)),
            }
        } else {
            other += 1;
        }
    }
    let msg = format!(
        "{strict} strict x 50 bumps, {violated} violated, {other} in neither class, {} contradictions",
        contradictions.len()
    );
    if contradictions.is_empty() && strict > 0 && violated > 0 {
        Ok(msg)
    } else {
        Err(format!("{msg}: {:?}", contradictions))
    }
}

fn closed_form_functional() -> Outcome {
    let field = CoefficientField::constant(CMat::identity(1, 1)).map_err(e2s)?;
    let dom = unit_box(1);
    let bump = TestFunction::PolynomialBump(
        PolynomialBump::simple(vec![Interval::new(0.0, 1.0)], CVec::from_vec(vec![C64::new(1.0, 0.0)])).map_err(e2s)?,
    );
    let quad = QuadOptions::with_intervals(1024);
    let v2 = eval_functional_v(&field, &dom, &profile(2.0), &bump, &quad).map_err(e2s)?;
    let v4 = eval_functional_v(&field, &dom, &profile(4.0), &bump, &quad).map_err(e2s)?;
    let e2 = (v2.lhs - 2.0 / 105.0).abs();
    let e4 = (v4.lhs - 1.0 / 70.0).abs();
    let msg = format!("errors {e2:.2e} and {e4:.2e}");
    if e2 <= 1e-8 && e4 <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn conjugacy_invariants() -> Outcome {
    let (mut roundtrip, mut tilde) = (0f64, 0f64);
    for r in [-0.5, 0.0, 1.0, 2.0] {
        let phi = PhiSpec::power(r + 2.0).map_err(e2s)?;
        let psi = phi.conjugate().map_err(e2s)?;
        for i in 0..50 {
            let s = 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0);
            let t = s * phi.phi(s);
            let psi_t = phi.psi_of(t).map_err(e2s)?;
            let back = t * psi_t;
            roundtrip = roundtrip.max(((back - s) / s).abs()).max(((psi.phi(t) - psi_t) / psi_t).abs());
            let tt = s * phi.phi(s).sqrt();
            let l = phi.lambda_of_t(tt).map_err(e2s)?;
            let lt = psi.lambda_of_t(tt).map_err(e2s)?;
            tilde = tilde.max((lt + l).abs());
        }
        if (psi.r + r / (r + 1.0)).abs() > 1e-12 {
            return Err(format!("conjugate exponent {} for r = {r}", psi.r));
        }
        let report = psi.validate(256).map_err(e2s)?;
        if !report.all_passed() {
            return Err(format!("conjugate of r = {r} fails {:?}", report.first_failed()));
        }
    }
    let msg = format!("roundtrip {roundtrip:.2e}, Lambda-tilde + Lambda {tilde:.2e}");
    if roundtrip <= 1e-9 && tilde <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn kappa_shift() -> Outcome {
    let mut rng = instances::rng(8);
    let opts = CheckOptions::default();
    let (mut strict_ok, mut bad_ok, mut failures) = (0, 0, Vec::new());
    for i in 0..200 {
        let strict_case = i < 100;
        let m = 2 + i % 2;
        let n = 1 + (i / 2) % 2;
        let p = [3.0, 4.0][(i / 4) % 2];
        let prof = profile(p);
        let rho = boundary_ratio(prof.lambda_inf_sq);
        let mats: Vec<CMat> = (0..n)
            .map(|h| {
                let lo = (2f64.ln() * rng.random::<f64>()).exp();
                let ratio = if strict_case {
                    1.0 + (rho - 1.0) * (0.05 + 0.9 * rng.random::<f64>())
                } else if h == 0 && i % 2 == 0 {
                    rho
                } else if h == 0 {
                    rho * (1.05 + rng.random::<f64>())
                } else {
                    1.0 + (rho - 1.0) * rng.random::<f64>()
                };
                let mut mu = vec![lo, lo * ratio];
                if m == 3 {
                    mu.push(lo * (1.0 + (ratio - 1.0) * rng.random::<f64>()));
                }
                rotated(&mut rng, &mu)
            })
            .collect();
        let field = CoefficientField::constant_per_h(mats).map_err(e2s)?;
        let dom = unit_box(n);
        let k = supremal_kappa(&field, &dom, &prof, &opts).map_err(e2s)?;
        match (strict_case, k) {
            (true, Some(k)) if k > 0.0 => strict_ok += 1,
            (false, None) => bad_ok += 1,
            (s, k) => failures.push(format!("instance {i} strict={s}: {k:?}")),
        }
    }
    let msg = format!("{strict_ok}/100 strict with kappa > 0, {bad_ok}/100 boundary or violated without");
    if failures.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {failures:?}"))
    }
}

fn per_h_decomposition() -> Outcome {
    let opts = ClassifyOptions::default();
    let mut total = (0, 0, 0);
    for (p, seed) in [(3.0, 900), (4.0, 950)] {
        let r = equivalence_harness(2, 2, &profile(p), 25, seed, &opts).map_err(e2s)?;
        total.0 += r.compared;
        total.1 += r.band_skipped;
        total.2 += r.disagreements.len();
    }
    let msg = format!("{} compared, {} in the band, {} disagreements", total.0, total.1, total.2);
    if total.2 == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn implication_order() -> Outcome {
    let mut rng = instances::rng(10);
    let opts = ClassifyOptions::default();
    let mut violations = Vec::new();
    let mut tally = [0usize; 3];
    for i in 0..500 {
        let p = [1.5, 3.0, 4.0, 6.0][i % 4];
        let prof = profile(p);
        let spread = 0.1 + 1.2 * rng.random::<f64>();
        let (field, n) = if i % 5 == 4 {
            (instances::random_tensor(&mut rng, 2, 2, spread).map_err(e2s)?, 2)
        } else {
            let n = 1 + i % 3;
            (instances::random_per_h(&mut rng, 2, n, spread).map_err(e2s)?, n)
        };
        let r = classify(&field, &unit_box(n), &prof, &opts).map_err(e2s)?;
        tally[match r.integral.holds {
            Tri::Holds => 0,
            Tri::Fails => 1,
            Tri::Inconclusive => 2,
        }] += 1;
        if r.strong.holds == Tri::Holds && r.integral.holds == Tri::Fails {
            violations.push(format!("run {i}: strong holds, integral fails"));
        }
        if field.is_per_h() && r.integral.holds == Tri::Holds && r.weak.holds == Tri::Fails {
            violations.push(format!("run {i}: integral holds, weak fails"));
        }
    }
    let msg = format!(
        "integral holds/fails/inconclusive = {}/{}/{}, {} violations",
        tally[0],
        tally[1],
        tally[2],
        violations.len()
    );
    if violations.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}: {violations:?}"))
    }
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Lambda exactness for powers", 1, lambda_exactness),
        ("m = 2 boundary reproduction", 30, boundary_reproduction),
        ("identity margin", 5, identity_margin),
        ("fast-path agreement", 120, fast_path_agreement),
        ("oracle agreement", 600, oracle_agreement),
        ("closed-form functional", 1, closed_form_functional),
        ("conjugacy invariants", 5, conjugacy_invariants),
        ("kappa-shift equivalence", 300, kappa_shift),
        ("per-h weak decomposition", 180, per_h_decomposition),
        ("implication order", 600, implication_order),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (verdict, detail) = match (&outcome, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the time budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {verdict} {name}: {detail} [{:.2} s of {budget} s]",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
