//! Named verification suites.
//!
//! Each suite draws seeded random instances, checks an identity or an
//! inequality that the library promises, and returns a [`SuiteReport`]
//! with pass/fail/skip counts and a handful of failure details. The
//! suites are what the CLI's `verify` subcommand runs; [`run_all`]
//! executes every suite in order.

use std::time::Instant;

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covering::{
    lemma42_verify, sumset_verify, verify_chain, Lemma42Instance, Metric, PointCloud,
};
use crate::derivation::{d_s, d_sa, d_u, partial_deriv, partial_deriv_presplit, Flavor, URoute};
use crate::error::{NcError, Result};
use crate::ncpoly::{Letter, Monomial, PolyTuple, Polynomial};
use crate::projections::{cheb_projection, op_norm, product_projection, ProductSide};
use crate::repn::{assemble, complex_gaussian_matrix, hs_norm, real_derivative, sample, SampleKind};
use crate::spectral::svd_measure;
use crate::volumes::{lemma_a3_sequence, wh_tail_check};

/// The suite names accepted by [`run_suite`], in the order [`run_all`]
/// executes them.
pub const SUITE_NAMES: [&str; 11] = [
    "leibniz",
    "route-agreement",
    "moment-match",
    "prop317",
    "prop327",
    "lemma42",
    "prop21",
    "lemma22",
    "lemma59",
    "lemma512",
    "a2",
];

/// Outcome of one verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    /// Suite name.
    pub name: String,
    /// Number of instances attempted.
    pub trials: usize,
    /// Instances whose checked property held.
    pub passed: usize,
    /// Instances whose checked property failed.
    pub failures: usize,
    /// Instances whose hypotheses could not be established (counted
    /// neither as passed nor failed).
    pub skipped: usize,
    /// Wall-clock runtime.
    pub elapsed_ms: u128,
    /// One-line outcome statement.
    pub verdict: String,
    /// Up to a few per-instance diagnostics (failures first).
    pub details: Vec<String>,
}

impl SuiteReport {
    /// True when no instance failed (skips are allowed but reported).
    pub fn ok(&self) -> bool {
        self.failures == 0
    }
}

const MAX_DETAILS: usize = 8;

struct Tally {
    passed: usize,
    failures: usize,
    skipped: usize,
    details: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { passed: 0, failures: 0, skipped: 0, details: Vec::new() }
    }

    fn pass(&mut self) {
        self.passed += 1;
    }

    fn fail(&mut self, detail: String) {
        self.failures += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(detail);
        }
    }

    fn skip(&mut self, detail: String) {
        self.skipped += 1;
        if self.details.len() < MAX_DETAILS {
            self.details.push(detail);
        }
    }

    fn finish(self, name: &str, trials: usize, verdict: String, start: Instant) -> SuiteReport {
        SuiteReport {
            name: name.into(),
            trials,
            passed: self.passed,
            failures: self.failures,
            skipped: self.skipped,
            elapsed_ms: start.elapsed().as_millis(),
            verdict,
            details: self.details,
        }
    }
}

fn default_trials(name: &str) -> usize {
    match name {
        "leibniz" => 1000,
        "route-agreement" => 200,
        "moment-match" => 50,
        "prop317" | "prop327" => 20,
        "lemma42" | "prop21" | "lemma22" => 50,
        "lemma59" => 1000,
        "lemma512" => 200,
        "a2" => 10_000,
        _ => 50,
    }
}

/// Runs one named suite. `trials = 0` selects the suite's default trial
/// count; the seed makes the run reproducible.
pub fn run_suite(name: &str, trials: usize, seed: u64) -> Result<SuiteReport> {
    let t = if trials == 0 { default_trials(name) } else { trials };
    match name {
        "leibniz" => suite_leibniz(t, seed),
        "route-agreement" => suite_route_agreement(t, seed),
        "moment-match" => suite_moment_match(t, seed),
        "prop317" => suite_prop317(t, seed),
        "prop327" => suite_prop327(t, seed),
        "lemma42" => suite_lemma42(t, seed),
        "prop21" => suite_prop21(t, seed),
        "lemma22" => suite_lemma22(t, seed),
        "lemma59" => suite_lemma59(t, seed),
        "lemma512" => suite_lemma512(t, seed),
        "a2" => suite_a2(t, seed),
        other => Err(NcError::Range(format!(
            "unknown suite {:?}; expected one of {}",
            other,
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Runs every suite with its default trial count.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    SUITE_NAMES.iter().map(|name| run_suite(name, 0, seed)).collect()
}

// ---------------------------------------------------------------------
// Random instance generators.

fn random_word(rng: &mut ChaCha8Rng, n: u32, min_deg: usize, max_deg: usize) -> Monomial {
    let deg = rng.gen_range(min_deg..=max_deg);
    Monomial(
        (0..deg)
            .map(|_| Letter::new(rng.gen_range(1..=n), rng.gen_bool(0.5)))
            .collect(),
    )
}

/// Random integer (Gaussian-integer coefficient) *-polynomial: the
/// identities checked symbolically then hold to rounding error exactly.
fn random_poly(rng: &mut ChaCha8Rng, n: u32, max_deg: usize, max_terms: usize) -> Polynomial {
    let arity = n as usize;
    let mut p = Polynomial::zero(arity);
    let terms = rng.gen_range(1..=max_terms);
    for _ in 0..terms {
        let w = random_word(rng, n, 1, max_deg);
        let c = Complex64::new(
            rng.gen_range(-3i32..=3) as f64,
            rng.gen_range(-3i32..=3) as f64,
        );
        if c.norm() > 0.0 {
            p.add_term(w, c);
        }
    }
    if p.is_zero() {
        p.add_term(Monomial::letter(Letter::new(1, false)), Complex64::new(1.0, 0.0));
    }
    p
}

fn poly_max_coeff(p: &Polynomial) -> f64 {
    p.terms().values().map(|c| c.norm()).fold(0.0, f64::max)
}

fn te_max_coeff(t: &crate::derivation::TensorElement) -> f64 {
    t.terms().values().map(|c| c.norm()).fold(0.0, f64::max)
}

fn te_diff(
    a: &crate::derivation::TensorElement,
    b: &crate::derivation::TensorElement,
) -> f64 {
    te_max_coeff(&a.add(&b.scale(Complex64::new(-1.0, 0.0))))
}

fn random_cloud(rng: &mut ChaCha8Rng, dim: usize, len: usize, scale: f64) -> Result<PointCloud> {
    let points = (0..len)
        .map(|_| {
            nalgebra::DVector::from_fn(dim, |_, _| scale * (rng.gen::<f64>() - 0.5))
        })
        .collect();
    PointCloud::new(points, Metric::Euclidean)
}

// ---------------------------------------------------------------------
// Suites.

/// Leibniz rule, complex linearity, and the star anti-homomorphism for
/// the symbolic layer, on random integer-coefficient *-polynomials.
fn suite_leibniz(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    const TOL: f64 = 1e-9;
    for t in 0..trials {
        let n = rng.gen_range(1..=3u32);
        let f = random_poly(&mut rng, n, 5, 4);
        let g = random_poly(&mut rng, n, 5, 4);
        let one = Polynomial::one(n as usize);
        let fg = f.mul(&g)?;
        let mut worst = 0.0f64;
        let mut what = String::new();

        for j in 1..=n {
            // Leibniz ∂(fg) = ∂f·(1⊗g) + (f⊗1)·∂g, in every calculus.
            for flavor in [Flavor::Sa, Flavor::Sk] {
                let lhs = partial_deriv(&fg, j, flavor)?;
                let rhs = partial_deriv(&f, j, flavor)?
                    .bimodule_poly(&one, &g)
                    .add(&partial_deriv(&g, j, flavor)?.bimodule_poly(&f, &one));
                let d = te_diff(&lhs, &rhs);
                if d > worst {
                    worst = d;
                    what = format!("leibniz {flavor:?} j={j}");
                }
            }
            let lhs = partial_deriv_presplit(&fg, j)?;
            let rhs = partial_deriv_presplit(&f, j)?
                .bimodule_poly(&one, &g)
                .add(&partial_deriv_presplit(&g, j)?.bimodule_poly(&f, &one));
            let d = te_diff(&lhs, &rhs);
            if d > worst {
                worst = d;
                what = format!("leibniz presplit j={j}");
            }

            // Linearity ∂(αf + βg) = α∂f + β∂g.
            let alpha = Complex64::new(rng.gen_range(-3i32..=3) as f64, 1.0);
            let beta = Complex64::new(2.0, rng.gen_range(-3i32..=3) as f64);
            let combo = f.scale(alpha).add(&g.scale(beta))?;
            for flavor in [Flavor::Sa, Flavor::Sk] {
                let lhs = partial_deriv(&combo, j, flavor)?;
                let rhs = partial_deriv(&f, j, flavor)?
                    .scale(alpha)
                    .add(&partial_deriv(&g, j, flavor)?.scale(beta));
                let d = te_diff(&lhs, &rhs);
                if d > worst {
                    worst = d;
                    what = format!("linearity {flavor:?} j={j}");
                }
            }
        }

        // Star anti-homomorphism: (fg)* = g*·f*, and the star is an
        // involution.
        let d = poly_max_coeff(&fg.star().sub(&g.star().mul(&f.star())?)?);
        if d > worst {
            worst = d;
            what = "star anti-homomorphism".into();
        }
        let d = poly_max_coeff(&f.star().star().sub(&f)?);
        if d > worst {
            worst = d;
            what = "star involution".into();
        }

        if worst <= TOL {
            tally.pass();
        } else {
            tally.fail(format!("trial {t}: {what} residual {worst:.3e} on f={f}, g={g}"));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("all {trials} random polynomial pairs satisfy Leibniz, linearity, and star laws")
    } else {
        format!("{} of {trials} pairs violate a symbolic law", tally.failures)
    };
    Ok(tally.finish("leibniz", trials, verdict, start))
}

/// Cross-checks the two computation routes of the unitary calculus on
/// random *-monomials. Both outcomes are explicit verdicts: agreement,
/// or a structured discrepancy report (counted as failures).
fn suite_route_agreement(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    const TOL: f64 = 1e-9;
    for t in 0..trials {
        let n = rng.gen_range(1..=3u32);
        let w = random_word(&mut rng, n, 1, 5);
        let f = PolyTuple::new(vec![Polynomial::from_term(
            n as usize,
            w.clone(),
            Complex64::new(1.0, 0.0),
        )])?;
        let a = d_u(&f, URoute::Definition)?;
        let b = d_u(&f, URoute::OccurrenceRule)?;
        let mut worst = 0.0f64;
        for j in 0..n as usize {
            let diff = a
                .get(0, j)
                .add(&b.get(0, j).scale(Complex64::new(-1.0, 0.0)))
                .unitary_reduce();
            worst = worst.max(te_max_coeff(&diff));
        }
        if worst <= TOL {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: routes differ on monomial {w} (max coefficient gap {worst:.3e})"
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("agreement: both unitary-calculus routes coincide on all {trials} monomials")
    } else {
        format!(
            "discrepancy: routes differ on {} of {trials} monomials after the unitary rewrite",
            tally.failures
        )
    };
    Ok(tally.finish("route-agreement", trials, verdict, start))
}

/// Normalized traces of powers of the derivative Gram matrix: the real
/// derivative and the assembled split derivative must agree to 1e−8
/// relative for powers m ≤ 4.
fn suite_moment_match(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let n = rng.gen_range(1..=2u32);
        let k = rng.gen_range(2..=6usize);
        let entries = rng.gen_range(1..=2usize);
        let f = PolyTuple::new(
            (0..entries).map(|_| random_poly(&mut rng, n, 3, 3)).collect(),
        )?;
        let kind = if t % 2 == 0 { SampleKind::GueSelfadjoint } else { SampleKind::HaarUnitary };
        let xi = sample(kind, k, n as usize, seed.wrapping_add(t as u64))?;
        let dr = real_derivative(&f, &xi)?;
        let gram_r = dr.transpose() * &dr;
        let ds = assemble(&d_s(&f)?, &xi)?;
        let gram_c = ds.mat.adjoint() * &ds.mat;
        let mut pow_r = DMatrix::<f64>::identity(gram_r.nrows(), gram_r.ncols());
        let mut pow_c = DMatrix::<Complex<f64>>::identity(gram_c.nrows(), gram_c.ncols());
        let mut worst = 0.0f64;
        let mut worst_m = 0usize;
        for m in 1..=4 {
            pow_r *= &gram_r;
            pow_c *= &gram_c;
            let tr_r = pow_r.trace() / gram_r.nrows() as f64;
            let tr_c = pow_c.trace().re / gram_c.nrows() as f64;
            let rel = (tr_r - tr_c).abs() / tr_c.abs().max(1e-30);
            if rel > worst {
                worst = rel;
                worst_m = m;
            }
        }
        if worst < 1e-8 {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: power {worst_m} traces differ by {worst:.3e} relative (k={k}, n={n})"
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("real and split derivative Gram moments match on all {trials} instances")
    } else {
        format!("{} of {trials} instances exceed the moment tolerance", tally.failures)
    };
    Ok(tally.finish("moment-match", trials, verdict, start))
}

/// Adjoining the skew parts to a self-adjoint tuple. The split derivative
/// of `G = F ∪ L` is row equivalent — by an explicit unipotent matrix `E`
/// that cancels the skew-derivative blocks against the rows of `L` — to a
/// reduced operator `T` whose singular multiset is exactly the values of
/// the self-adjoint calculus of `F` (zero-padded to the domain size)
/// merged with an equal number of ones. The suite checks three things at
/// self-adjoint points: the exact multiset identity for `T = E·D^sG`,
/// integer kernel equality between `D^sG` and `T` (nullity is invariant
/// under row equivalence), and the counting domination
/// `#{σ(D^sG) ≤ t} ≤ #{σ(T) ≤ ‖E‖·t}` on a grid of thresholds.
fn suite_prop317(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let n = rng.gen_range(1..=2u32);
        let p = rng.gen_range(1..=2usize);
        let k = rng.gen_range(2..=5usize);
        let arity = n as usize;
        // Self-adjoint entries: f = (q + q*)/2 is *-invariant exactly.
        let f_entries: Vec<Polynomial> = (0..p)
            .map(|_| {
                let q = random_poly(&mut rng, n, 3, 3);
                q.add(&q.star()).map(|s| s.scale(Complex64::new(0.5, 0.0)))
            })
            .collect::<Result<_>>()?;
        // Skew parts L_j = (X_j − X_j*)/2.
        let mut entries = f_entries.clone();
        for j in 1..=n {
            let mut l = Polynomial::from_term(
                arity,
                Monomial::letter(Letter::new(j, false)),
                Complex64::new(0.5, 0.0),
            );
            l.add_term(Monomial::letter(Letter::new(j, true)), Complex64::new(-0.5, 0.0));
            entries.push(l);
        }
        let f = PolyTuple::new(f_entries)?;
        let g = PolyTuple::new(entries)?;
        let xi = sample(SampleKind::GueSelfadjoint, k, arity, seed.wrapping_add(t as u64))?;
        let kk = k * k;

        let ds = d_s(&g)?;
        let a = assemble(&ds, &xi)?.mat;

        // Unipotent row reduction: subtract, from the self-adjoint output
        // row of each F entry, its skew-derivative block times the matching
        // skew row of L (which holds an identity in that column and nothing
        // else). The result zeroes the skew columns of the F rows exactly.
        let rows = 2 * (p + arity) * kk;
        let mut e = DMatrix::<Complex64>::identity(rows, rows);
        for i in 0..p {
            for j in 0..arity {
                let block = crate::repn::sigma_eval(ds.get(2 * i, 2 * j + 1), &xi)?.mat;
                let target = (2 * (p + j) + 1) * kk;
                e.view_mut((2 * i * kk, target), (kk, kk))
                    .copy_from(&block.map(|z| -z));
            }
        }
        let t_red = &e * &a;

        let sv_a = svd_measure(&crate::repn::BigMatrix { mat: a.clone(), normalization: k })?;
        let sv_t =
            svd_measure(&crate::repn::BigMatrix { mat: t_red.clone(), normalization: k })?;

        // (a) exact multiset identity on the reduced representative.
        let lhs = sv_t.values.clone();
        let mut rhs = svd_measure(&assemble(&d_sa(&f)?, &xi)?)?.values;
        rhs.resize(arity * kk, 0.0);
        rhs.extend(std::iter::repeat(1.0).take(arity * kk));
        rhs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let multiset_err = if lhs.len() == rhs.len() {
            lhs.iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                .fold(0.0f64, f64::max)
        } else {
            f64::INFINITY
        };

        // (b) kernel counts are invariant under the row equivalence.
        let kernel = |sv: &crate::spectral::SpectralMeasure| {
            let tau = 1e-10 * sv.max_value().max(1.0);
            2 * arity * kk - sv.values.iter().filter(|&&v| v > tau).count()
        };
        let kernel_ok = kernel(&sv_a) == kernel(&sv_t);

        // (c) counting domination with the explicit constant c = ‖E‖.
        let c = op_norm(&e) * (1.0 + 1e-12);
        let sigma_max = sv_a.max_value().max(1e-12);
        let count_le = |sv: &[f64], t: f64| sv.iter().filter(|&&v| v <= t).count();
        let domination_ok = (1..=16).all(|g| {
            let thr = sigma_max * g as f64 / 16.0;
            count_le(&sv_a.values, thr) <= count_le(&sv_t.values, c * thr)
        });

        if multiset_err < 1e-8 && kernel_ok && domination_ok {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: multiset err {multiset_err:.3e}, kernels {} vs {}, domination {domination_ok} (k={k}, n={n}, p={p})",
                kernel(&sv_a),
                kernel(&sv_t)
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!(
            "reduced multiset identity, kernel equality, and decay domination hold on all {trials} instances"
        )
    } else {
        format!("{} of {trials} instances break the identity", tally.failures)
    };
    Ok(tally.finish("prop317", trials, verdict, start))
}

/// Adjoining the unitary relations: at unitary tuples, the integer
/// kernel count of the split derivative of `H = {f − I} ∪ {X_j*X_j − I}`
/// (out of `2nk²`) must equal the kernel count of the unitary calculus
/// of `{f}` (out of `nk²`).
fn suite_prop327(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let n = rng.gen_range(1..=2u32);
        let k = rng.gen_range(2..=4usize);
        let arity = n as usize;
        // Mix generic words with words that rewrite to short (or empty)
        // words, so degenerate kernels are exercised too.
        let w = match t % 3 {
            0 => random_word(&mut rng, n, 1, 4),
            1 => {
                let v = random_word(&mut rng, n, 1, 2);
                v.concat(&v.star())
            }
            _ => {
                let v = random_word(&mut rng, n, 1, 2);
                v.concat(&v.star()).concat(&random_word(&mut rng, n, 1, 2))
            }
        };
        let one = Polynomial::one(arity);
        let f_mono = Polynomial::from_term(arity, w.clone(), Complex64::new(1.0, 0.0));
        let mut h_entries = vec![f_mono.sub(&one)?];
        for j in 1..=n {
            let rel = Monomial(vec![Letter::new(j, true), Letter::new(j, false)]);
            h_entries.push(Polynomial::from_term(arity, rel, Complex64::new(1.0, 0.0)).sub(&one)?);
        }
        let h = PolyTuple::new(h_entries)?;
        let f = PolyTuple::new(vec![f_mono])?;
        let xi = sample(SampleKind::HaarUnitary, k, arity, seed.wrapping_add(t as u64))?;
        let kk = k * k;

        let sv_s = svd_measure(&assemble(&d_s(&h)?, &xi)?)?;
        let tau_s = 1e-10 * sv_s.max_value().max(1.0);
        let rank_s = sv_s.values.iter().filter(|&&v| v > tau_s).count();
        let kernel_s = 2 * arity * kk - rank_s;

        let sv_u = svd_measure(&assemble(&d_u(&f, URoute::OccurrenceRule)?, &xi)?)?;
        let tau_u = 1e-10 * sv_u.max_value().max(1.0);
        let rank_u = sv_u.values.iter().filter(|&&v| v > tau_u).count();
        let kernel_u = arity * kk - rank_u;

        if kernel_s == kernel_u {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: kernel counts differ ({kernel_s} vs {kernel_u}) on word {w} (k={k}, n={n})"
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("split-vs-unitary kernel counts agree on all {trials} unitary instances")
    } else {
        format!("{} of {trials} instances break the kernel identity", tally.failures)
    };
    Ok(tally.finish("prop327", trials, verdict, start))
}

/// The localized covering inequality on brute-force instances: linear
/// coordinate projections and small nonlinear perturbations on clouds of
/// 1×1 matrix tuples, all covering numbers exact.
fn suite_lemma42(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let nonlinear = t % 3 == 2;
        let inst = if nonlinear {
            // f = X1 + 0.2·X1² on a small disk: derivative oscillation
            // stays far below β/4.
            let pts: Vec<crate::repn::MatrixTuple> = (0..rng.gen_range(5..=10usize))
                .map(|_| {
                    crate::repn::MatrixTuple::new(
                        1,
                        vec![DMatrix::from_vec(
                            1,
                            1,
                            vec![Complex64::new(
                                0.05 * (rng.gen::<f64>() - 0.5),
                                0.05 * (rng.gen::<f64>() - 0.5),
                            )],
                        )],
                    )
                    .expect("1x1 tuple")
                })
                .collect();
            let mut f = Polynomial::from_term(
                1,
                Monomial::letter(Letter::new(1, false)),
                Complex64::new(1.0, 0.0),
            );
            f.add_term(
                Monomial(vec![Letter::new(1, false), Letter::new(1, false)]),
                Complex64::new(0.2, 0.0),
            );
            Lemma42Instance {
                x0: pts[0].clone(),
                points: pts,
                f: PolyTuple::new(vec![f])?,
                q: DMatrix::identity(2, 2),
                beta: 0.8,
                t: 0.97,
                eps: 0.01 + 0.09 * rng.gen::<f64>(),
                hull_samples: 10,
                seed: seed.wrapping_add(t as u64),
            }
        } else {
            // f keeps the first of two coordinates; Q projects onto it.
            let pts: Vec<crate::repn::MatrixTuple> = (0..rng.gen_range(5..=10usize))
                .map(|_| {
                    let mats = (0..2)
                        .map(|_| {
                            DMatrix::from_vec(
                                1,
                                1,
                                vec![Complex64::new(
                                    0.2 * (rng.gen::<f64>() - 0.5),
                                    0.2 * (rng.gen::<f64>() - 0.5),
                                )],
                            )
                        })
                        .collect();
                    crate::repn::MatrixTuple::new(1, mats).expect("1x1 tuple")
                })
                .collect();
            let mut q = DMatrix::<f64>::zeros(4, 4);
            q[(0, 0)] = 1.0;
            q[(1, 1)] = 1.0;
            Lemma42Instance {
                x0: pts[0].clone(),
                points: pts,
                f: PolyTuple::new(vec![crate::ncpoly::parse("X1", 2)?])?,
                q,
                beta: 1.0,
                t: 0.95,
                eps: 0.02 + 0.25 * rng.gen::<f64>(),
                hull_samples: 10,
                seed: seed.wrapping_add(t as u64),
            }
        };
        let rep = lemma42_verify(&inst)?;
        match rep.holds {
            Some(true) => tally.pass(),
            Some(false) => tally.fail(format!(
                "trial {t}: K_eps(E) = {} exceeds product bound {} = {:?}",
                rep.lhs, rep.rhs, rep.rhs_factors
            )),
            None => tally.skip(format!(
                "trial {t}: hypotheses not established (gap margin {:.3e}, oscillation {:.3e})",
                rep.gap_margin, rep.oscillation
            )),
        }
    }
    let verdict = if tally.failures == 0 {
        format!(
            "localized covering inequality holds on {} instances ({} skipped on hypotheses)",
            tally.passed, tally.skipped
        )
    } else {
        format!("{} of {trials} instances violate the inequality", tally.failures)
    };
    Ok(tally.finish("lemma42", trials, verdict, start))
}

/// Covering/packing arithmetic on random finite clouds: subset and union
/// laws, radius monotonicity, fattening, and the packing sandwich.
fn suite_prop21(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let cloud = if t % 5 == 4 {
            // Matrix-tuple cloud under the normalized metric.
            let tuples: Vec<crate::repn::MatrixTuple> = (0..5)
                .map(|i| {
                    sample(
                        SampleKind::GueSelfadjoint,
                        2,
                        1,
                        seed.wrapping_add((t * 10 + i) as u64),
                    )
                })
                .collect::<Result<_>>()?;
            PointCloud::from_tuples(&tuples, Metric::L2Normalized { k: 2 })?
        } else {
            let dim = rng.gen_range(2..=6usize);
            let len = rng.gen_range(4..=8usize);
            let scale = 1.0 + rng.gen::<f64>();
            random_cloud(&mut rng, dim, len, scale)?
        };
        let eps = 0.1 + 0.7 * rng.gen::<f64>();
        let rep = verify_chain(&cloud, eps)?;
        if rep.holds {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: chain violated at eps={eps:.3} (subset {}, union {}, radius {}, sandwich {})",
                rep.subset_ok, rep.union_ok, rep.radius_monotone_ok, rep.sandwich_ok
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("covering/packing arithmetic holds on all {trials} clouds")
    } else {
        format!("{} of {trials} clouds violate the chain", tally.failures)
    };
    Ok(tally.finish("prop21", trials, verdict, start))
}

/// Sumset covering/packing bounds on random factor clouds with exact
/// small-instance covers.
fn suite_lemma22(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let dim = rng.gen_range(2..=3usize);
        let (sizes, _total): (Vec<usize>, usize) = if t % 2 == 0 {
            (vec![rng.gen_range(3..=4), rng.gen_range(3..=5)], 20)
        } else {
            (vec![2, 3, 3], 18)
        };
        let clouds: Vec<PointCloud> = sizes
            .iter()
            .map(|&len| random_cloud(&mut rng, dim, len, 1.0))
            .collect::<Result<_>>()?;
        let eps = 0.1 + 0.5 * rng.gen::<f64>();
        let rep = sumset_verify(&clouds, eps)?;
        if rep.holds {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: sumset chain violated at eps={eps:.3} (S_sum={}, K_sum={}, K-product factors {:?})",
                rep.s_sum, rep.k_sum, rep.k_factors
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("sumset covering bounds hold on all {trials} factorizations")
    } else {
        format!("{} of {trials} factorizations violate the bounds", tally.failures)
    };
    Ok(tally.finish("lemma22", trials, verdict, start))
}

/// Chebyshev cut-off projection bounds: operator-norm control by the
/// normalized Hilbert–Schmidt norm with the quadratic trace floor.
fn suite_lemma59(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let k = 16;
    for t in 0..trials {
        let c = if t % 2 == 0 { 2.0 } else { 3.0 };
        let z = complex_gaussian_matrix(k, &mut rng);
        let cert = cheb_projection(&z, c)?;
        let norm_ok = cert.bound_achieved <= c * hs_norm(&z) * (1.0 + 1e-12);
        let trace_ok = cert.trace >= 1.0 - 1.0 / (c * c) - 1e-12;
        if norm_ok && trace_ok {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: C={c}: achieved {} vs bound {}, trace {} vs floor {}",
                cert.bound_achieved,
                c * hs_norm(&z),
                cert.trace,
                1.0 - 1.0 / (c * c)
            ));
        }
    }
    let verdict = if tally.failures == 0 {
        format!("cut-off projection bounds hold on all {trials} random matrices (k={k})")
    } else {
        format!("{} of {trials} matrices violate the cut-off bounds", tally.failures)
    };
    Ok(tally.finish("lemma59", trials, verdict, start))
}

/// Product and two-sided projection bounds: `trials` one-sided product
/// instances plus `trials` two-sided instances, all at k = 16.
fn suite_lemma512(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let k = 16;
    const REL: f64 = 1.0 + 1e-9;

    for t in 0..trials {
        let c = if t % 2 == 0 { 2.0 } else { 3.0 };
        let m = rng.gen_range(2..=4usize);
        let zs: Vec<DMatrix<Complex64>> =
            (0..m).map(|_| complex_gaussian_matrix(k, &mut rng)).collect();
        let prod_l2: f64 = zs.iter().map(hs_norm).product();
        let side = if t % 4 < 2 { ProductSide::Right } else { ProductSide::Left };
        let cert = product_projection(&zs, c, side)?;
        let norm_ok = cert.bound_achieved <= c.powi(m as i32) * prod_l2 * REL;
        let trace_ok = cert.trace >= 1.0 - m as f64 / (c * c) - 1e-12;
        if norm_ok && trace_ok {
            tally.pass();
        } else {
            tally.fail(format!(
                "one-sided trial {t}: C={c}, m={m}: achieved {} vs bound {}, trace {}",
                cert.bound_achieved,
                c.powi(m as i32) * prod_l2,
                cert.trace
            ));
        }
    }

    for t in 0..trials {
        let c = if t % 2 == 0 { 2.0 } else { 3.0 };
        let m = rng.gen_range(2..=4usize);
        let s = rng.gen_range(1..m);
        let zs: Vec<DMatrix<Complex64>> =
            (0..m).map(|_| complex_gaussian_matrix(k, &mut rng)).collect();
        let cert = product_projection(&zs, c, ProductSide::TwoSided(s))?;
        let mut left_prod = zs[0].clone();
        for z in &zs[1..s] {
            left_prod = left_prod * z;
        }
        let mut right_prod = zs[s].clone();
        for z in &zs[s + 1..] {
            right_prod = right_prod * z;
        }
        let left_bound: f64 = c.powi(s as i32) * zs[..s].iter().map(hs_norm).product::<f64>();
        let right_bound: f64 =
            c.powi((m - s) as i32) * zs[s..].iter().map(hs_norm).product::<f64>();
        let left_ok = op_norm(&(&cert.p * left_prod)) <= left_bound * REL;
        let right_ok = op_norm(&(right_prod * &cert.p)) <= right_bound * REL;
        let trace_ok = cert.trace >= 1.0 - m as f64 / (c * c) - 1e-12;
        if left_ok && right_ok && trace_ok {
            tally.pass();
        } else {
            tally.fail(format!(
                "two-sided trial {t}: C={c}, m={m}, split {s}: left {left_ok}, right {right_ok}, trace {} ",
                cert.trace
            ));
        }
    }

    let total = 2 * trials;
    let verdict = if tally.failures == 0 {
        format!("product and two-sided projection bounds hold on all {total} instances (k={k})")
    } else {
        format!("{} of {total} instances violate the product bounds", tally.failures)
    };
    Ok(tally.finish("lemma512", total, verdict, start))
}

/// Singular-value tail perturbation bound on random low-rank-plus-small
/// instances, plus the log-volume sequence convergence checks.
fn suite_a2(trials: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for t in 0..trials {
        let k = rng.gen_range(4..=8usize);
        let d = rng.gen_range(1..k);
        let eps = 0.05 + 0.2 * rng.gen::<f64>();
        // Rank ≤ d by construction: a k×d times d×k Gaussian product.
        let a = DMatrix::<Complex64>::from_fn(k, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let b = DMatrix::<Complex64>::from_fn(d, k, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let x = a * b;
        let mut y = complex_gaussian_matrix(k, &mut rng);
        let target = eps * (0.1 + 0.85 * rng.gen::<f64>());
        let scale = target / hs_norm(&y).max(1e-300);
        y = y.map(|z| z * scale);
        let rep = wh_tail_check(&x, d, &y, eps)?;
        if rep.holds {
            tally.pass();
        } else {
            tally.fail(format!(
                "trial {t}: tail {} exceeds bound {} (k={k}, d={d}, eps={eps:.3})",
                rep.tail, rep.bound
            ));
        }
    }

    // Convergence of the normalized log-volume sequence toward −1/2.
    let seq = lemma_a3_sequence(40)?;
    let g = |k: usize| {
        seq.iter().find(|(kk, _)| *kk == k).map(|(_, v)| *v).expect("sequence value")
    };
    let g10 = (g(10) + 0.5).abs();
    let g40 = (g(40) + 0.5).abs();
    let seq_ok = g40 < g10 && g40 < 0.05;
    if seq_ok {
        tally.pass();
    } else {
        tally.fail(format!(
            "log-volume sequence: |g(40)+1/2| = {g40:.4} (|g(10)+1/2| = {g10:.4})"
        ));
    }

    let total = trials + 1;
    let verdict = if tally.failures == 0 {
        format!(
            "tail bound holds on {trials} perturbed low-rank samples; sequence gap {g40:.4} at k=40"
        )
    } else {
        format!("{} of {total} checks failed", tally.failures)
    };
    Ok(tally.finish("a2", total, verdict, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_suite_small() {
        let rep = run_suite("leibniz", 50, 7).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 50);
    }

    #[test]
    fn route_agreement_suite_small() {
        let rep = run_suite("route-agreement", 40, 11).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert!(rep.verdict.starts_with("agreement"));
    }

    #[test]
    fn moment_match_suite_small() {
        let rep = run_suite("moment-match", 10, 3).unwrap();
        assert!(rep.ok(), "{:?}", rep);
    }

    #[test]
    fn prop317_suite_small() {
        let rep = run_suite("prop317", 8, 5).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 8);
    }

    #[test]
    fn prop327_suite_small() {
        let rep = run_suite("prop327", 9, 13).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 9);
    }

    #[test]
    fn lemma42_suite_small() {
        let rep = run_suite("lemma42", 12, 17).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert!(rep.passed > 0);
    }

    #[test]
    fn prop21_suite_small() {
        let rep = run_suite("prop21", 10, 19).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 10);
    }

    #[test]
    fn lemma22_suite_small() {
        let rep = run_suite("lemma22", 8, 23).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 8);
    }

    #[test]
    fn lemma59_suite_small() {
        let rep = run_suite("lemma59", 30, 29).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 30);
    }

    #[test]
    fn lemma512_suite_small() {
        let rep = run_suite("lemma512", 6, 31).unwrap();
        assert!(rep.ok(), "{:?}", rep);
        assert_eq!(rep.passed, 12);
    }

    #[test]
    fn a2_suite_small() {
        let rep = run_suite("a2", 100, 37).unwrap();
        assert!(rep.ok(), "{:?}", rep);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nonsense", 1, 0).is_err());
    }
}
