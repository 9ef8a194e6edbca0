//! Command-line front end: norm computation, ratio certification, and the
//! verification suites, all emitting schema-versioned JSON on stdout.
//!
//! Every randomized command takes `--seed` (default 0, overridable through
//! the `PQNORM_SEED` environment variable) and is bit-reproducible: the same
//! flags and seed produce byte-identical output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use pqnorm::{
    approx_ratio_with_step, duality_check, embedding_experiment, gaussian_moment, kron_check,
    noise_correlation_mc, norm_grid, norm_power, round_best, solve_cp, verify_sign_pattern,
    DenseMatrix, Error, ExponentPair, SolveOptions, DEFAULT_TRUNCATION,
};

const SCHEMA: &str = "pqnorm/1";

fn parse_extended(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|e| format!("expected a number or \"inf\": {e}"))
}

/// Exponent as a JSON value, `inf` spelled out as a string.
fn ext(v: f64) -> Value {
    if v.is_infinite() { json!("inf") } else { json!(v) }
}

#[derive(Parser)]
#[command(name = "pqnorm", version, about = "Matrix p->q operator norm toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExponentArgs {
    /// Source exponent p in [2, inf]; pass "inf" for infinity.
    #[arg(long, value_parser = parse_extended)]
    p: f64,
    /// Target exponent q in [1, 2].
    #[arg(long, value_parser = parse_extended)]
    q: f64,
}

#[derive(Args)]
struct SeedArg {
    /// RNG seed; defaults to $PQNORM_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            std::env::var("PQNORM_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0)
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Alternating Holder-dual ascent (lower bound).
    Power,
    /// Exhaustive sphere grid, up to 3 columns (lower bound).
    Grid,
    /// Convex relaxation value (upper bound on the norm up to the ratio).
    Cp,
    /// Relaxation plus Krivine rounding (feasible lower bound).
    Round,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the p->q norm of a matrix file (CSV or JSON).
    Norm {
        file: PathBuf,
        #[command(flatten)]
        exponents: ExponentArgs,
        #[arg(long, value_enum, default_value_t = Method::Power)]
        method: Method,
        #[command(flatten)]
        seed: SeedArg,
        /// Restarts for the power method.
        #[arg(long, default_value_t = 20)]
        starts: usize,
        /// Angular resolution for the grid method.
        #[arg(long, default_value_t = 2000)]
        resolution: usize,
        /// Gaussian draws for the rounding method.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Emit the approximation-ratio report for (p, q).
    Certify {
        #[command(flatten)]
        exponents: ExponentArgs,
        /// Grid step for the coefficient sign checks.
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// Report the ratio against the certified lower bound instead of c_ab.
        #[arg(long)]
        certified: bool,
    },
    /// Round a relaxation solution to a feasible pair and report it.
    Round {
        file: PathBuf,
        #[command(flatten)]
        exponents: ExponentArgs,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Check the inverse-coefficient sign conditions on the (a, b) grid.
    Coeffs {
        #[arg(long, default_value_t = 29)]
        kmax: usize,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
    },
    /// Monte-Carlo check of the correlation identity at one (a, b, rho).
    Identity {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Kronecker multiplicativity on random pairs (requires p <= q).
    Kron {
        #[arg(long, value_parser = parse_extended, default_value = "2")]
        p: f64,
        #[arg(long, value_parser = parse_extended, default_value = "4")]
        q: f64,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Transpose duality on random instances.
    Duality {
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Gaussian approximate-isometry experiment.
    Embedding {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 5000)]
        m: usize,
        #[arg(long, value_parser = parse_extended, default_value = "4")]
        q: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
}

fn run(cli: Cli) -> Result<Value, Error> {
    match cli.command {
        Command::Norm { file, exponents, method, seed, starts, resolution, trials } => {
            let a = DenseMatrix::from_path(&file)?;
            let seed = seed.resolve();
            let (method_name, payload) = match method {
                Method::Power => {
                    let (value, x) = norm_power(&a, exponents.p, exponents.q, starts, seed)?;
                    ("power", json!({ "value": value, "x": x, "starts": starts }))
                }
                Method::Grid => {
                    let value = norm_grid(&a, exponents.p, exponents.q, resolution)?;
                    ("grid", json!({ "value": value, "resolution": resolution }))
                }
                Method::Cp => {
                    let pair = ExponentPair::new(exponents.p, exponents.q)?;
                    let opts = SolveOptions { seed, ..SolveOptions::default() };
                    let sol = solve_cp(&a, &pair, &opts)?;
                    ("cp", json!({ "value": sol.value, "converged": sol.converged }))
                }
                Method::Round => {
                    let pair = ExponentPair::new(exponents.p, exponents.q)?;
                    let opts = SolveOptions { seed, ..SolveOptions::default() };
                    let sol = solve_cp(&a, &pair, &opts)?;
                    let rounded = round_best(&a, &sol, &pair, trials, seed)?;
                    (
                        "round",
                        json!({
                            "value": rounded.value,
                            "relaxation_value": sol.value,
                            "trial": rounded.trial,
                            "trials": trials,
                        }),
                    )
                }
            };
            Ok(json!({
                "schema": SCHEMA,
                "command": "norm",
                "p": ext(exponents.p),
                "q": ext(exponents.q),
                "method": method_name,
                "seed": seed,
                "result": payload,
            }))
        }
        Command::Certify { exponents, grid_step, certified } => {
            let pair = ExponentPair::new(exponents.p, exponents.q)?;
            let report = approx_ratio_with_step(&pair, certified, grid_step)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "certify",
                "p": ext(exponents.p),
                "q": ext(exponents.q),
                "certified": certified,
                "result": serde_json::to_value(&report)?,
            }))
        }
        Command::Round { file, exponents, trials, seed } => {
            let a = DenseMatrix::from_path(&file)?;
            let pair = ExponentPair::new(exponents.p, exponents.q)?;
            let seed = seed.resolve();
            let opts = SolveOptions { seed, ..SolveOptions::default() };
            let sol = solve_cp(&a, &pair, &opts)?;
            let rounded = round_best(&a, &sol, &pair, trials, seed)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "round",
                "p": ext(exponents.p),
                "q": ext(exponents.q),
                "trials": trials,
                "seed": seed,
                "result": {
                    "y": rounded.y,
                    "x": rounded.x,
                    "value": rounded.value,
                    "relaxation_value": sol.value,
                    "trial": rounded.trial,
                },
            }))
        }
        Command::Verify(verify) => run_verify(verify),
    }
}

fn run_verify(cmd: VerifyCommand) -> Result<Value, Error> {
    match cmd {
        VerifyCommand::Coeffs { kmax, grid_step } => {
            let report = verify_sign_pattern(kmax, grid_step)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "verify coeffs",
                "pass": report.all_pass,
                "result": serde_json::to_value(&report)?,
            }))
        }
        VerifyCommand::Identity { a, b, rho, samples, seed } => {
            let seed = seed.resolve();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let estimate = noise_correlation_mc(a, b, rho, samples, &mut rng)?;
            let scale = gaussian_moment(a + 1.0)?.powf(a + 1.0)
                * gaussian_moment(b + 1.0)?.powf(b + 1.0);
            let expected = scale * pqnorm::f_eval_ab(a, b, rho, DEFAULT_TRUNCATION)?;
            let sigmas = estimate.sigmas_from(expected);
            Ok(json!({
                "schema": SCHEMA,
                "command": "verify identity",
                "a": a,
                "b": b,
                "rho": rho,
                "samples": samples,
                "seed": seed,
                "pass": sigmas <= 4.0,
                "result": {
                    "mean": estimate.mean,
                    "std_error": estimate.std_error,
                    "expected": expected,
                    "sigmas": sigmas,
                },
            }))
        }
        VerifyCommand::Kron { p, q, pairs, seed } => {
            let seed = seed.resolve();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut reports = Vec::new();
            let mut all_pass = true;
            for _ in 0..pairs {
                let a = DenseMatrix::gaussian(2, 2, &mut rng);
                let b = DenseMatrix::gaussian(2, 2, &mut rng);
                let report = kron_check(&a, &b, p, q)?;
                all_pass &= report.pass;
                reports.push(serde_json::to_value(&report)?);
            }
            Ok(json!({
                "schema": SCHEMA,
                "command": "verify kron",
                "p": ext(p),
                "q": ext(q),
                "pairs": pairs,
                "seed": seed,
                "pass": all_pass,
                "result": reports,
            }))
        }
        VerifyCommand::Duality { instances, seed } => {
            let seed = seed.resolve();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shapes = [(2usize, 3usize), (3, 3), (4, 2), (3, 4)];
            let exponents =
                [(f64::INFINITY, 1.0), (4.0, 4.0 / 3.0), (2.0, 1.0), (3.0, 1.5)];
            let mut reports = Vec::new();
            let mut all_pass = true;
            for i in 0..instances {
                let (m, n) = shapes[i % shapes.len()];
                let (p, q) = exponents[i % exponents.len()];
                let a = DenseMatrix::gaussian(m, n, &mut rng);
                let report = duality_check(&a, p, q)?;
                all_pass &= report.pass;
                reports.push(serde_json::to_value(&report)?);
            }
            Ok(json!({
                "schema": SCHEMA,
                "command": "verify duality",
                "instances": instances,
                "seed": seed,
                "pass": all_pass,
                "result": reports,
            }))
        }
        VerifyCommand::Embedding { n, m, q, trials, seed } => {
            let seed = seed.resolve();
            let report = embedding_experiment(n, m, q, trials, seed)?;
            Ok(json!({
                "schema": SCHEMA,
                "command": "verify embedding",
                "seed": seed,
                "pass": report.max_deviation <= 0.1,
                "result": serde_json::to_value(&report)?,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            let payload = json!({ "schema": SCHEMA, "error": err.to_string() });
            println!("{}", serde_json::to_string_pretty(&payload).expect("error serializes"));
            ExitCode::FAILURE
        }
    }
}
