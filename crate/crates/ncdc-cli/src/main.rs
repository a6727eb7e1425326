//! `ncdc` — command-line front end for the noncommutative derivative
//! calculus library.
//!
//! Every run prints a self-describing JSON report (command, config echo,
//! versions, results) to stdout. `--out` additionally writes the report —
//! or, with `--format csv`, the command's tabular payload — to a file.
//! Exit codes: 0 success, 1 verification failure or runtime error,
//! 2 usage error.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use ncdc::covering::{
    build_binding, dim_fit, kcover, rogers_bound, spack, CoverMode, Metric, PointCloud,
    EXACT_LIMIT,
};
use ncdc::derivation::{d_s, d_sa, d_u, TensorMatrix, URoute};
use ncdc::ncpoly::{parse, PolyTuple, Polynomial};
use ncdc::projections::cheb_projection;
use ncdc::repn::{
    assemble, eval_poly, hs_norm, sample, BigMatrix, MatrixTuple, SampleKind,
};
use ncdc::spectral::{decay_diagnostic, fkl_det, nullity_rank, svd_measure, SpectralMeasure};
use ncdc::verify::{run_all, run_suite, SuiteReport, SUITE_NAMES};
use ncdc::volumes::{lemma_a3_sequence, log_ck, mc_schatten2_check, schatten2_ball_log_volume};

#[derive(Parser, Debug)]
#[command(name = "ncdc", version, about = "Noncommutative derivative calculi: derivatives, spectra, covering numbers, bindings, volumes, verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Write the report (JSON) or the tabular payload (CSV) to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for `--out`: the JSON report or the command's table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SampleArg {
    /// Haar-distributed unitaries.
    Haar,
    /// GUE self-adjoint matrices.
    Gue,
    /// Commuting diagonal matrices.
    Diag,
}

impl SampleArg {
    fn kind(self) -> SampleKind {
        match self {
            SampleArg::Haar => SampleKind::HaarUnitary,
            SampleArg::Gue => SampleKind::GueSelfadjoint,
            SampleArg::Diag => SampleKind::CommutingDiagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CalcArg {
    /// Split calculus (2m×2n blocks).
    S,
    /// Self-adjoint calculus.
    Sa,
    /// Unitary calculus (occurrence rule).
    U,
}

/// Polynomial tuple given as repeated `--expr`, with a common arity.
#[derive(Args, Debug, Serialize)]
struct TupleArgs {
    /// Polynomial expression; repeat the flag for a tuple.
    #[arg(long = "expr", required = true)]
    exprs: Vec<String>,
    /// Number of indeterminates.
    #[arg(long)]
    n: usize,
}

impl TupleArgs {
    fn tuple(&self) -> Result<PolyTuple> {
        let entries = self
            .exprs
            .iter()
            .map(|e| parse(e, self.n).map_err(|err| anyhow!("{err}")))
            .collect::<Result<Vec<_>>>()?;
        PolyTuple::new(entries).map_err(|err| anyhow!("{err}"))
    }
}

/// Representation point: a sampled random tuple or a JSON file.
#[derive(Args, Debug, Serialize)]
struct PointArgs {
    /// Matrix size.
    #[arg(long)]
    k: usize,
    /// RNG seed (mandatory: every randomized run is reproducible).
    #[arg(long)]
    seed: u64,
    /// Random family to sample.
    #[arg(long, value_enum, default_value_t = SampleArg::Gue)]
    sample: SampleArg,
    /// JSON file with an explicit matrix tuple (overrides sampling).
    #[arg(long)]
    point: Option<PathBuf>,
}

impl PointArgs {
    fn point(&self, n: usize) -> Result<MatrixTuple> {
        match &self.point {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let tuple: MatrixTuple = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                if tuple.n() < n {
                    return Err(anyhow!(
                        "point has {} coordinates but arity {} is required",
                        tuple.n(),
                        n
                    ));
                }
                Ok(tuple)
            }
            None => sample(self.sample.kind(), self.k, n, self.seed).map_err(|e| anyhow!("{e}")),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse a *-polynomial and print its canonical form.
    Parse {
        /// Polynomial expression.
        #[arg(long)]
        expr: String,
        /// Number of indeterminates.
        #[arg(long)]
        n: usize,
    },
    /// Symbolic derivative of a polynomial tuple.
    Derive {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Which calculus to apply.
        #[arg(long, value_enum)]
        calc: CalcArg,
    },
    /// Evaluate a polynomial at a representation point.
    Eval {
        /// Polynomial expression.
        #[arg(long)]
        expr: String,
        /// Number of indeterminates.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Singular-value spectrum of an assembled derivative.
    Spectrum {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, value_enum)]
        calc: CalcArg,
        #[command(flatten)]
        point: PointArgs,
    },
    /// Normalized nullity/rank of an assembled derivative.
    Nullity {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, value_enum)]
        calc: CalcArg,
        #[command(flatten)]
        point: PointArgs,
        /// Kernel threshold (default: 1e-10 times the largest value).
        #[arg(long)]
        tau: Option<f64>,
        /// Normalized domain dimension (default: column blocks of the
        /// assembled derivative).
        #[arg(long)]
        scale: Option<usize>,
    },
    /// Regularized log-determinant of an evaluated polynomial.
    Fkl {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Geometric-decay diagnostic of an assembled derivative spectrum.
    Decay {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, value_enum)]
        calc: CalcArg,
        #[command(flatten)]
        point: PointArgs,
        /// Base of the geometric windows.
        #[arg(long, default_value_t = 0.5)]
        eps0: f64,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Chebyshev cut-off projection of a random matrix.
    Chebproj {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Cut-off constant.
        #[arg(long, default_value_t = 2.0)]
        c: f64,
    },
    /// Covering and packing numbers of a finite point cloud.
    Cover {
        /// Ambient dimension of the random cloud.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Number of random points.
        #[arg(long, default_value_t = 10)]
        len: usize,
        #[arg(long)]
        seed: u64,
        /// Ball radius.
        #[arg(long)]
        eps: f64,
        /// Side length of the sampling cube.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// JSON file with explicit points (array of arrays), overriding
        /// the random cloud.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Least-squares slope of log covering numbers against |log eps|.
    Dimfit {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        len: usize,
        #[arg(long)]
        seed: u64,
        /// Radius grid (at least three values).
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Euclidean ball-covering upper bound.
    Rogers {
        /// Ambient dimension.
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        /// Radius of the covered ball.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Universal constant multiplier.
        #[arg(long, default_value_t = 1.0)]
        cr: f64,
    },
    /// Binding construction for distance operators over a ball.
    Binding {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Ball radius.
        #[arg(long)]
        rho: f64,
        /// Operator-norm bound on the ball.
        #[arg(long)]
        r: f64,
        /// Number of sampled pairs.
        #[arg(long, default_value_t = 8)]
        pairs: usize,
        /// Scaling applied to the sampled center so it stays inside the
        /// operator-norm ball.
        #[arg(long, default_value_t = 0.9)]
        center_scale: f64,
    },
    /// Log-volume of normalized Schatten-2 balls.
    Volume {
        /// Matrix size.
        #[arg(long)]
        k: usize,
        /// Ball radius.
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Monte Carlo cross-check samples (0 = skip; requires --seed).
        #[arg(long, default_value_t = 0)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// The normalized log-volume sequence and its limit gap.
    A3seq {
        #[arg(long)]
        kmax: usize,
    },
    /// Run a named verification suite (or `all`).
    Verify {
        /// Suite name.
        suite: String,
        /// Trial count (0 = suite default).
        #[arg(long, default_value_t = 0)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Built-in worked examples.
    Example {
        /// One of: ex4.1, ex4.2, tensor-chain, haar-fkl.
        name: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        eps0: f64,
    },
}

/// An argument combination clap cannot rule out statically; exits 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) if err.is::<UsageError>() => {
            eprintln!("usage error: {err}");
            2
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

/// Outcome of one subcommand: the `results` payload, an optional CSV
/// table, and the exit code.
struct Outcome {
    results: Value,
    csv: Option<String>,
    code: i32,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, csv: None, code: 0 }
    }

    fn with_csv(results: Value, csv: String) -> Self {
        Outcome { results, csv: Some(csv), code: 0 }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let command = command_name(&cli.cmd);
    let config = config_echo(&cli)?;
    let outcome = dispatch(&cli.cmd)?;

    let report = json!({
        "command": command,
        "config": config,
        "versions": {
            "ncdc": ncdc_version(),
            "ncdc-cli": env!("CARGO_PKG_VERSION"),
        },
        "results": outcome.results,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);

    match (cli.format, &cli.out) {
        (Format::Json, Some(path)) => {
            fs::write(path, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        (Format::Csv, Some(path)) => match &outcome.csv {
            Some(csv) => fs::write(path, csv)
                .with_context(|| format!("writing {}", path.display()))?,
            None => {
                eprintln!("usage error: this command has no CSV table");
                return Ok(2);
            }
        },
        (Format::Csv, None) => {
            eprintln!("usage error: --format csv requires --out");
            return Ok(2);
        }
        (Format::Json, None) => {}
    }
    Ok(outcome.code)
}

fn ncdc_version() -> &'static str {
    // The workspace pins both crates to one version.
    env!("CARGO_PKG_VERSION")
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Parse { .. } => "parse",
        Cmd::Derive { .. } => "derive",
        Cmd::Eval { .. } => "eval",
        Cmd::Spectrum { .. } => "spectrum",
        Cmd::Nullity { .. } => "nullity",
        Cmd::Fkl { .. } => "fkl",
        Cmd::Decay { .. } => "decay",
        Cmd::Chebproj { .. } => "chebproj",
        Cmd::Cover { .. } => "cover",
        Cmd::Dimfit { .. } => "dimfit",
        Cmd::Rogers { .. } => "rogers",
        Cmd::Binding { .. } => "binding",
        Cmd::Volume { .. } => "volume",
        Cmd::A3seq { .. } => "a3seq",
        Cmd::Verify { .. } => "verify",
        Cmd::Example { .. } => "example",
    }
}

/// Serializes the full argument set back into the report so a run can be
/// reproduced from its own output.
fn config_echo(cli: &Cli) -> Result<Value> {
    let args = json!(format!("{:?}", cli.cmd));
    Ok(json!({
        "args": args,
        "format": cli.format,
        "out": cli.out.as_ref().map(|p| p.display().to_string()),
    }))
}

fn dispatch(cmd: &Cmd) -> Result<Outcome> {
    match cmd {
        Cmd::Parse { expr, n } => cmd_parse(expr, *n),
        Cmd::Derive { tuple, calc } => cmd_derive(tuple, *calc),
        Cmd::Eval { expr, n, point } => cmd_eval(expr, *n, point),
        Cmd::Spectrum { tuple, calc, point } => cmd_spectrum(tuple, *calc, point),
        Cmd::Nullity { tuple, calc, point, tau, scale } => {
            cmd_nullity(tuple, *calc, point, *tau, *scale)
        }
        Cmd::Fkl { expr, n, point, tau } => cmd_fkl(expr, *n, point, *tau),
        Cmd::Decay { tuple, calc, point, eps0, tau } => {
            cmd_decay(tuple, *calc, point, *eps0, *tau)
        }
        Cmd::Chebproj { k, seed, c } => cmd_chebproj(*k, *seed, *c),
        Cmd::Cover { dim, len, seed, eps, scale, input } => {
            cmd_cover(*dim, *len, *seed, *eps, *scale, input.as_deref())
        }
        Cmd::Dimfit { dim, len, seed, grid, scale, input } => {
            cmd_dimfit(*dim, *len, *seed, grid, *scale, input.as_deref())
        }
        Cmd::Rogers { d, eps, alpha, cr } => cmd_rogers(*d, *eps, *alpha, *cr),
        Cmd::Binding { tuple, k, seed, rho, r, pairs, center_scale } => {
            cmd_binding(tuple, *k, *seed, *rho, *r, *pairs, *center_scale)
        }
        Cmd::Volume { k, r, samples, seed } => cmd_volume(*k, *r, *samples, *seed),
        Cmd::A3seq { kmax } => cmd_a3seq(*kmax),
        Cmd::Verify { suite, trials, seed } => cmd_verify(suite, *trials, *seed),
        Cmd::Example { name, k, n, seed, eps0 } => cmd_example(name, *k, *n, *seed, *eps0),
    }
}

// ---------------------------------------------------------------------
// Individual commands.

fn cmd_parse(expr: &str, n: usize) -> Result<Outcome> {
    let p = parse(expr, n).map_err(|e| anyhow!("{e}"))?;
    let star = p.star();
    Ok(Outcome::ok(json!({
        "canonical": p.to_string(),
        "arity": p.arity(),
        "degree": p.degree(),
        "terms": p.terms().len(),
        "star": star.to_string(),
        "is_star_invariant": star == p,
    })))
}

fn tensor_matrix_json(tm: &TensorMatrix) -> Value {
    let entries: Vec<Vec<Value>> = (0..tm.rows())
        .map(|i| {
            (0..tm.cols())
                .map(|j| {
                    let terms: Vec<Value> = tm
                        .get(i, j)
                        .terms()
                        .iter()
                        .map(|(key, c)| {
                            json!({
                                "w": key.w.to_string(),
                                "v": key.v.to_string(),
                                "conj": key.d,
                                "re": c.re,
                                "im": c.im,
                            })
                        })
                        .collect();
                    json!(terms)
                })
                .collect()
        })
        .collect();
    json!({
        "rows": tm.rows(),
        "cols": tm.cols(),
        "block": format!("{:?}", tm.block()),
        "entries": entries,
    })
}

fn derivative_matrix(tuple: &TupleArgs, calc: CalcArg) -> Result<TensorMatrix> {
    let f = tuple.tuple()?;
    let tm = match calc {
        CalcArg::S => d_s(&f),
        CalcArg::Sa => d_sa(&f),
        CalcArg::U => d_u(&f, URoute::OccurrenceRule),
    };
    tm.map_err(|e| anyhow!("{e}"))
}

fn cmd_derive(tuple: &TupleArgs, calc: CalcArg) -> Result<Outcome> {
    let tm = derivative_matrix(tuple, calc)?;
    Ok(Outcome::ok(tensor_matrix_json(&tm)))
}

fn cmd_eval(expr: &str, n: usize, point: &PointArgs) -> Result<Outcome> {
    let p = parse(expr, n).map_err(|e| anyhow!("{e}"))?;
    let xi = point.point(n)?;
    let m = eval_poly(&p, &xi).map_err(|e| anyhow!("{e}"))?;
    let tr = ncdc::repn::tr_norm(&m);
    let mut results = json!({
        "k": xi.k(),
        "trace_re": tr.re,
        "trace_im": tr.im,
        "hs_norm": hs_norm(&m),
    });
    if xi.k() <= 8 {
        let entries: Vec<Vec<(f64, f64)>> = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
            .collect();
        results["matrix"] = json!(entries);
    }
    Ok(Outcome::ok(results))
}

fn assembled_spectrum(
    tuple: &TupleArgs,
    calc: CalcArg,
    point: &PointArgs,
) -> Result<(SpectralMeasure, usize)> {
    let tm = derivative_matrix(tuple, calc)?;
    let xi = point.point(tuple.n)?;
    let big = assemble(&tm, &xi).map_err(|e| anyhow!("{e}"))?;
    let cols = tm.cols();
    let sm = svd_measure(&big).map_err(|e| anyhow!("{e}"))?;
    Ok((sm, cols))
}

fn cmd_spectrum(tuple: &TupleArgs, calc: CalcArg, point: &PointArgs) -> Result<Outcome> {
    let (sm, _) = assembled_spectrum(tuple, calc, point)?;
    let csv = sm.to_csv();
    Ok(Outcome::with_csv(json!(sm), csv))
}

fn cmd_nullity(
    tuple: &TupleArgs,
    calc: CalcArg,
    point: &PointArgs,
    tau: Option<f64>,
    scale: Option<usize>,
) -> Result<Outcome> {
    let (sm, cols) = assembled_spectrum(tuple, calc, point)?;
    let tau = tau.unwrap_or_else(|| sm.default_tau());
    let scale = scale.unwrap_or(cols);
    let nr = nullity_rank(&sm, tau, scale).map_err(|e| anyhow!("{e}"))?;
    Ok(Outcome::ok(json!({ "tau": tau, "scale": scale, "nullity_rank": nr })))
}

fn cmd_fkl(expr: &str, n: usize, point: &PointArgs, tau: Option<f64>) -> Result<Outcome> {
    let p = parse(expr, n).map_err(|e| anyhow!("{e}"))?;
    let xi = point.point(n)?;
    let m = eval_poly(&p, &xi).map_err(|e| anyhow!("{e}"))?;
    let sm = svd_measure(&BigMatrix { mat: m, normalization: xi.k() })
        .map_err(|e| anyhow!("{e}"))?;
    let tau = tau.unwrap_or_else(|| sm.default_tau());
    let det = fkl_det(&sm, tau).map_err(|e| anyhow!("{e}"))?;
    Ok(Outcome::ok(json!({ "tau": tau, "fkl_det": det, "max_value": sm.max_value() })))
}

fn cmd_decay(
    tuple: &TupleArgs,
    calc: CalcArg,
    point: &PointArgs,
    eps0: f64,
    tau: Option<f64>,
) -> Result<Outcome> {
    let (sm, _) = assembled_spectrum(tuple, calc, point)?;
    let tau = tau.unwrap_or_else(|| sm.default_tau());
    let rep = decay_diagnostic(&sm, eps0, tau).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("window,tail_sum\n");
    for (i, s) in rep.tail_sums.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, s));
    }
    Ok(Outcome::with_csv(json!({ "tau": tau, "decay": rep }), csv))
}

fn cmd_chebproj(k: usize, seed: u64, c: f64) -> Result<Outcome> {
    let xi = sample(SampleKind::GueSelfadjoint, k, 2, seed).map_err(|e| anyhow!("{e}"))?;
    let z = &xi.mats()[0] + xi.mats()[1].map(|v| v * Complex64::new(0.0, 1.0));
    let cert = cheb_projection(&z, c).map_err(|e| anyhow!("{e}"))?;
    Ok(Outcome::ok(json!({
        "c": c,
        "hs_norm": hs_norm(&z),
        "cert": cert.to_dto(k <= 8),
    })))
}

fn load_cloud(
    dim: usize,
    len: usize,
    seed: u64,
    scale: f64,
    input: Option<&std::path::Path>,
) -> Result<PointCloud> {
    let points: Vec<DVector<f64>> = match input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let raw: Vec<Vec<f64>> = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            raw.into_iter().map(DVector::from_vec).collect()
        }
        None => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..len)
                .map(|_| DVector::from_fn(dim, |_, _| scale * (rng.gen::<f64>() - 0.5)))
                .collect()
        }
    };
    PointCloud::new(points, Metric::Euclidean).map_err(|e| anyhow!("{e}"))
}

fn cmd_cover(
    dim: usize,
    len: usize,
    seed: u64,
    eps: f64,
    scale: f64,
    input: Option<&std::path::Path>,
) -> Result<Outcome> {
    let cloud = load_cloud(dim, len, seed, scale, input)?;
    let mode = if cloud.len() <= EXACT_LIMIT { CoverMode::Exact } else { CoverMode::Greedy };
    let k_eps = kcover(&cloud, eps, mode).map_err(|e| anyhow!("{e}"))?;
    let s_eps = spack(&cloud, eps).map_err(|e| anyhow!("{e}"))?;
    Ok(Outcome::ok(json!({
        "points": cloud.len(),
        "eps": eps,
        "mode": format!("{mode:?}"),
        "covering_number": k_eps,
        "packing_number": s_eps,
    })))
}

fn cmd_dimfit(
    dim: usize,
    len: usize,
    seed: u64,
    grid: &[f64],
    scale: f64,
    input: Option<&std::path::Path>,
) -> Result<Outcome> {
    let cloud = load_cloud(dim, len, seed, scale, input)?;
    let rep = dim_fit(&cloud, grid).map_err(|e| anyhow!("{e}"))?;
    let csv = rep.to_csv();
    Ok(Outcome::with_csv(json!(rep), csv))
}

fn cmd_rogers(d: usize, eps: f64, alpha: f64, cr: f64) -> Result<Outcome> {
    let rep = rogers_bound(d, eps, alpha, cr).map_err(|e| anyhow!("{e}"))?;
    Ok(Outcome::ok(json!(rep)))
}

fn cmd_binding(
    tuple: &TupleArgs,
    k: usize,
    seed: u64,
    rho: f64,
    r: f64,
    pairs: usize,
    center_scale: f64,
) -> Result<Outcome> {
    let f = tuple.tuple()?;
    let xi0 = sample(SampleKind::GueSelfadjoint, k, tuple.n, seed).map_err(|e| anyhow!("{e}"))?;
    let mats: Vec<DMatrix<Complex64>> = xi0
        .mats()
        .iter()
        .map(|m| m.map(|z| z * Complex64::new(center_scale, 0.0)))
        .collect();
    let xi0 = MatrixTuple::new(k, mats).map_err(|e| anyhow!("{e}"))?;
    let binding =
        build_binding(&f, &xi0, rho, r, pairs, seed.wrapping_add(1)).map_err(|e| anyhow!("{e}"))?;
    let ok = binding.ok();
    Ok(Outcome::ok(json!({ "ok": ok, "binding": binding })))
}

fn cmd_volume(k: usize, r: f64, samples: u64, seed: Option<u64>) -> Result<Outcome> {
    let log_vol = schatten2_ball_log_volume(k, r).map_err(|e| anyhow!("{e}"))?;
    let lck = log_ck(k).map_err(|e| anyhow!("{e}"))?;
    let mut results = json!({
        "k": k,
        "r": r,
        "log_volume": log_vol,
        "log_ck": lck,
    });
    if samples > 0 {
        let Some(seed) = seed else {
            return Err(UsageError("--samples requires --seed (randomized run)".into()).into());
        };
        let mc = mc_schatten2_check(k, r, samples, seed).map_err(|e| anyhow!("{e}"))?;
        results["mc"] = json!(mc);
    }
    Ok(Outcome::ok(results))
}

fn cmd_a3seq(kmax: usize) -> Result<Outcome> {
    let seq = lemma_a3_sequence(kmax).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("k,g\n");
    for (k, g) in &seq {
        csv.push_str(&format!("{},{}\n", k, g));
    }
    let last = seq.last().copied().unwrap_or((0, f64::NAN));
    Ok(Outcome::with_csv(
        json!({
            "kmax": kmax,
            "limit": -0.5,
            "last_k": last.0,
            "last_value": last.1,
            "last_gap": (last.1 + 0.5).abs(),
            "sequence": seq,
        }),
        csv,
    ))
}

fn cmd_verify(suite: &str, trials: usize, seed: u64) -> Result<Outcome> {
    let reports: Vec<SuiteReport> = if suite == "all" {
        run_all(seed).map_err(|e| anyhow!("{e}"))?
    } else {
        vec![run_suite(suite, trials, seed).map_err(|e| anyhow!("{e}"))?]
    };
    let all_ok = reports.iter().all(SuiteReport::ok);
    for r in &reports {
        eprintln!(
            "suite {:>16}: {} ({} trials, {} failed, {} skipped, {} ms) — {}",
            r.name,
            if r.ok() { "ok" } else { "FAILED" },
            r.trials,
            r.failures,
            r.skipped,
            r.elapsed_ms,
            r.verdict
        );
    }
    Ok(Outcome {
        results: json!({ "ok": all_ok, "suites": reports, "known_suites": SUITE_NAMES }),
        csv: None,
        code: if all_ok { 0 } else { 1 },
    })
}

// ---------------------------------------------------------------------
// Built-in example pipelines.

fn commutator_example(k: usize, seed: u64, eps0: f64) -> Result<Value> {
    let f = TupleArgs { exprs: vec!["X2 X1 - X1' X2'".into()], n: 2 };
    let tm = derivative_matrix(&f, CalcArg::Sa)?;
    let xi = sample(SampleKind::CommutingDiagonal, k, 2, seed).map_err(|e| anyhow!("{e}"))?;
    let sm = svd_measure(&assemble(&tm, &xi).map_err(|e| anyhow!("{e}"))?)
        .map_err(|e| anyhow!("{e}"))?;
    let tau = sm.default_tau();
    let nr = nullity_rank(&sm, tau, 2).map_err(|e| anyhow!("{e}"))?;
    let decay = decay_diagnostic(&sm, eps0, tau).map_err(|e| anyhow!("{e}"))?;
    Ok(json!({
        "k": k,
        "nullity_rank": nr,
        "expected_nullity": 1.0 + 1.0 / k as f64,
        "limit_nullity": 1.0,
        "decay": decay,
    }))
}

fn cmd_example(
    name: &str,
    k: Option<usize>,
    n: Option<usize>,
    seed: u64,
    eps0: f64,
) -> Result<Outcome> {
    match name {
        "ex4.1" => {
            let k = k.unwrap_or(16);
            Ok(Outcome::ok(commutator_example(k, seed, eps0)?))
        }
        "ex4.2" => {
            let k = k.unwrap_or(8);
            let f = TupleArgs { exprs: vec!["X2 X1 X3 X1".into()], n: 3 };
            let tm = derivative_matrix(&f, CalcArg::U)?;
            let xi =
                sample(SampleKind::HaarUnitary, k, 3, seed).map_err(|e| anyhow!("{e}"))?;
            let sm = svd_measure(&assemble(&tm, &xi).map_err(|e| anyhow!("{e}"))?)
                .map_err(|e| anyhow!("{e}"))?;
            let tau = sm.default_tau();
            let nr = nullity_rank(&sm, tau, 3).map_err(|e| anyhow!("{e}"))?;
            Ok(Outcome::ok(json!({
                "k": k,
                "nullity_rank": nr,
                "expected_nullity": 3.0 - 1.0,
                "note": "the word has one injective partial derivative, so the rank tends to 1",
            })))
        }
        "tensor-chain" => {
            let k = k.unwrap_or(8);
            let n = n.unwrap_or(4);
            if n < 2 {
                return Err(anyhow!("tensor-chain needs n >= 2"));
            }
            let exprs: Vec<String> = (1..n)
                .map(|i| format!("X{} X{} - X{}' X{}'", i, i + 1, i + 1, i))
                .collect();
            let f = TupleArgs { exprs, n };
            let tm = derivative_matrix(&f, CalcArg::Sa)?;
            let mut per_k = Vec::new();
            for kk in [k / 2, k] {
                if kk == 0 {
                    continue;
                }
                let xi = sample(SampleKind::CommutingDiagonal, kk, n, seed)
                    .map_err(|e| anyhow!("{e}"))?;
                let sm = svd_measure(&assemble(&tm, &xi).map_err(|e| anyhow!("{e}"))?)
                    .map_err(|e| anyhow!("{e}"))?;
                let tau = sm.default_tau();
                let nr = nullity_rank(&sm, tau, n).map_err(|e| anyhow!("{e}"))?;
                let decay = decay_diagnostic(&sm, eps0, tau).map_err(|e| anyhow!("{e}"))?;
                per_k.push(json!({ "k": kk, "nullity_rank": nr, "decay": decay }));
            }
            Ok(Outcome::ok(json!({ "n": n, "family": per_k })))
        }
        "haar-fkl" => {
            let k = k.unwrap_or(500);
            let p = Polynomial::one(1).sub(&Polynomial::gen(1, 1)).map_err(|e| anyhow!("{e}"))?;
            let xi =
                sample(SampleKind::HaarUnitary, k, 1, seed).map_err(|e| anyhow!("{e}"))?;
            let m = eval_poly(&p, &xi).map_err(|e| anyhow!("{e}"))?;
            let sm = svd_measure(&BigMatrix { mat: m, normalization: k })
                .map_err(|e| anyhow!("{e}"))?;
            let det = fkl_det(&sm, sm.default_tau()).map_err(|e| anyhow!("{e}"))?;
            Ok(Outcome::ok(json!({
                "k": k,
                "fkl_det": det,
                "oracle": 1.0,
                "abs_error": (det - 1.0).abs(),
            })))
        }
        other => Err(anyhow!(
            "unknown example {other:?}; expected ex4.1, ex4.2, tensor-chain, or haar-fkl"
        )),
    }
}
