//! Acceptance gate: twelve criteria, one printed pass/fail line each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every
//! line; each criterion is its own test so failures are localized.

use std::time::{Duration, Instant};

use ncdc::covering::build_binding;
use ncdc::derivation::d_sa;
use ncdc::ncpoly::{parse, PolyTuple};
use ncdc::repn::{assemble, eval_poly, sample, BigMatrix, MatrixTuple, SampleKind};
use ncdc::spectral::{fkl_det, nullity_rank, svd_measure};
use ncdc::verify::run_suite;
use ncdc::volumes::{lemma_a3_sequence, mc_schatten2_check};
use num_complex::Complex64;

fn report(criterion: usize, label: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion:2} ({label}): {} — {detail}",
        if pass { "pass" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} ({label}) failed: {detail}");
}

fn suite_criterion(
    criterion: usize,
    label: &str,
    suite: &str,
    trials: usize,
    seed: u64,
    budget: Duration,
) {
    let start = Instant::now();
    let rep = run_suite(suite, trials, seed).expect("suite runs");
    let elapsed = start.elapsed();
    let pass = rep.ok() && rep.trials >= trials && elapsed <= budget;
    report(
        criterion,
        label,
        pass,
        &format!(
            "{} trials, {} failures, {} ms (budget {} s); {}",
            rep.trials,
            rep.failures,
            rep.elapsed_ms,
            budget.as_secs(),
            rep.verdict
        ),
    );
}

#[test]
fn criterion_01_leibniz() {
    suite_criterion(1, "leibniz/linearity/star laws", "leibniz", 1000, 42, Duration::from_secs(10));
}

#[test]
fn criterion_02_route_agreement() {
    let start = Instant::now();
    let rep = run_suite("route-agreement", 200, 42).expect("suite runs");
    let elapsed = start.elapsed();
    // Either verdict is acceptable, but it must be explicit and the run
    // must cover the trial budget in time.
    let explicit =
        rep.verdict.starts_with("agreement") || rep.verdict.starts_with("discrepancy");
    let pass = explicit && rep.trials >= 200 && elapsed <= Duration::from_secs(30);
    report(
        2,
        "unitary-calculus route agreement",
        pass,
        &format!("{} trials in {} ms; verdict: {}", rep.trials, rep.elapsed_ms, rep.verdict),
    );
}

#[test]
fn criterion_03_moment_match() {
    suite_criterion(
        3,
        "real/complex Gram moment match",
        "moment-match",
        50,
        42,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_04_split_vs_sa_reduction() {
    suite_criterion(
        4,
        "split-to-selfadjoint spectral reduction",
        "prop317",
        20,
        42,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_05_unitary_kernel_match() {
    suite_criterion(
        5,
        "unitary-relations kernel equality",
        "prop327",
        20,
        42,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_06_commutator_nullity() {
    let f = PolyTuple::new(vec![parse("X2 X1 - X1' X2'", 2).unwrap()]).unwrap();
    let tm = d_sa(&f).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for k in [4usize, 8, 16] {
        let xi = sample(SampleKind::CommutingDiagonal, k, 2, 7).unwrap();
        let sm = svd_measure(&assemble(&tm, &xi).unwrap()).unwrap();
        let nr = nullity_rank(&sm, sm.default_tau(), 2).unwrap();
        let expected = 1.0 + 1.0 / k as f64;
        let ok = (nr.nullity - expected).abs() < 1e-12;
        pass &= ok;
        detail.push_str(&format!("k={k}: nullity={} (want {expected}); ", nr.nullity));
    }
    report(6, "commutator nullity 1 + 1/k", pass, &detail);
}

#[test]
fn criterion_07_haar_fkl() {
    let start = Instant::now();
    let k = 500;
    let p = ncdc::ncpoly::Polynomial::one(1)
        .sub(&ncdc::ncpoly::Polynomial::gen(1, 1))
        .unwrap();
    let xi = sample(SampleKind::HaarUnitary, k, 1, 11).unwrap();
    let m = eval_poly(&p, &xi).unwrap();
    let sm = svd_measure(&BigMatrix { mat: m, normalization: k }).unwrap();
    let det = fkl_det(&sm, sm.default_tau()).unwrap();
    let elapsed = start.elapsed();
    let pass = (det - 1.0).abs() <= 0.05 && elapsed <= Duration::from_secs(10);
    report(
        7,
        "regularized determinant of 1 − u at Haar",
        pass,
        &format!("det={det:.6}, |det−1|={:.2e}, {} ms", (det - 1.0).abs(), elapsed.as_millis()),
    );
}

#[test]
fn criterion_08_projection_lemmas() {
    let cut = run_suite("lemma59", 1000, 42).expect("suite runs");
    let prod = run_suite("lemma512", 200, 42).expect("suite runs");
    let pass = cut.ok() && prod.ok() && cut.trials >= 1000 && prod.trials >= 200;
    report(
        8,
        "cut-off and product projections",
        pass,
        &format!(
            "cut-off: {}/{} ok; products: {}/{} ok",
            cut.trials - cut.failures,
            cut.trials,
            prod.trials - prod.failures,
            prod.trials
        ),
    );
}

#[test]
fn criterion_09_covering_arithmetic() {
    let chain = run_suite("prop21", 50, 42).expect("suite runs");
    let sumset = run_suite("lemma22", 50, 42).expect("suite runs");
    let gap = run_suite("lemma42", 50, 42).expect("suite runs");
    let pass = chain.ok() && sumset.ok() && gap.ok();
    report(
        9,
        "covering/packing arithmetic",
        pass,
        &format!(
            "chain {} failures, sumset {} failures, gap-criterion {} failures ({} skipped)",
            chain.failures, sumset.failures, gap.failures, gap.skipped
        ),
    );
}

#[test]
fn criterion_10_binding() {
    let k = 8;
    let f = PolyTuple::new(vec![parse("X1 X1", 1).unwrap()]).unwrap();
    let raw = sample(SampleKind::GueSelfadjoint, k, 1, 2).unwrap();
    // Scale the center into the interior so every perturbed point stays
    // inside the operator-norm ball of radius 2.
    let mats = raw
        .mats()
        .iter()
        .map(|m| m.map(|z| z * Complex64::new(0.9, 0.0)))
        .collect();
    let xi0 = MatrixTuple::new(k, mats).unwrap();
    let binding = build_binding(&f, &xi0, 0.01, 2.0, 50, 3).unwrap();
    let residual_max = binding
        .pairs
        .iter()
        .map(|p| p.mean_value_residual)
        .fold(0.0_f64, f64::max);
    let pass = binding.ok()
        && binding.pairs.len() == 50
        && (binding.b_constant - 128.0).abs() < 1e-12
        && (binding.bound - 51.2).abs() < 1e-9
        && residual_max < 1e-9;
    report(
        10,
        "binding for the squaring map",
        pass,
        &format!(
            "epsilon={:.4} ≤ bound={}, trace_floor={:.6} ≥ {:.6}, max residual={:.2e}",
            binding.epsilon, binding.bound, binding.trace_floor, binding.trace_bound, residual_max
        ),
    );
}

#[test]
fn criterion_11_volumes() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = String::new();

    for k in [1usize, 2] {
        let mc = mc_schatten2_check(k, 1.0, 1_000_000, 100 + k as u64).unwrap();
        pass &= mc.within_3_sigma;
        detail.push_str(&format!(
            "MC k={k}: est {:.3} vs formula {:.3} ({}σ ok={}); ",
            mc.mc_estimate,
            mc.log_formula.exp(),
            3,
            mc.within_3_sigma
        ));
    }

    let seq = lemma_a3_sequence(40).unwrap();
    let g = |k: usize| seq.iter().find(|(kk, _)| *kk == k).unwrap().1;
    let gap40 = (g(40) + 0.5).abs();
    let gap10 = (g(10) + 0.5).abs();
    pass &= gap40 < gap10 && gap40 < 0.05;
    detail.push_str(&format!("|g(40)+1/2|={gap40:.4} < |g(10)+1/2|={gap10:.4}; "));

    let tail = run_suite("a2", 10_000, 42).expect("suite runs");
    pass &= tail.ok();
    detail.push_str(&format!("tail bound: {} failures/{} trials; ", tail.failures, tail.trials));

    let elapsed = start.elapsed();
    pass &= elapsed <= Duration::from_secs(120);
    detail.push_str(&format!("{} s total", elapsed.as_secs()));
    report(11, "Schatten-ball volumes", pass, &detail);
}

#[test]
fn criterion_12_verify_all() {
    let start = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_ncdc"))
        .args(["verify", "all", "--seed", "1"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let pass = out.status.success() && elapsed <= Duration::from_secs(300);
    report(
        12,
        "full verification battery via the CLI",
        pass,
        &format!(
            "exit={:?} in {} s; stderr tail: {}",
            out.status.code(),
            elapsed.as_secs(),
            String::from_utf8_lossy(&out.stderr).lines().last().unwrap_or("")
        ),
    );
}
