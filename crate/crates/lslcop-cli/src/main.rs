//! `lslcop` — batch front end for the diagonal-section copula library.
//!
//! Every subcommand is deterministic in its arguments: identical invocations
//! produce byte-identical output. Results go to stdout unless `--out` is
//! given (for `iterate`, `--out` receives the per-iteration trace CSV while
//! the limit JSON always goes to stdout). Exit codes: 0 success, 2 malformed
//! input, 3 validation failure, 4 iteration did not converge.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lslcop::concordance::{region_scan, report, FamilySelector};
use lslcop::diagonal::Diagonal;
use lslcop::error::{Error, Result};
use lslcop::jsonio::{
    csv_region, csv_samples, csv_trace, csv_xk, csv_yk, diagonal_json, fmt_float, from_json,
    iterate_json, measures_json, star_json, validation_json,
};
use lslcop::lsl::{kernel_cdf, sample, surface};
use lslcop::oracle::{rho_quadrature, tau_quadrature};
use lslcop::star::{iterate_star, star};
use lslcop::validate::{default_tol, validate_dlsl};

#[derive(Parser)]
#[command(
    name = "lslcop",
    version,
    about = "Lower semilinear copulas from diagonal sections: validation, \
             evaluation, star products, concordance measures, sampling"
)]
struct Cli {
    /// Write the command's output to this file instead of stdout
    /// (for `iterate`: receives the trace CSV; the JSON stays on stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check class membership of a diagonal file (exit 0 iff member).
    Validate {
        /// Diagonal JSON file.
        input: PathBuf,
        /// Validation tolerance; 0 switches piecewise-linear inputs to an
        /// exact rational check.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Evaluate the copula surface at a point.
    Eval {
        input: PathBuf,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Conditional-distribution slice as CSV: `--x` sweeps y ↦ K(x,[0,y]),
    /// `--y` sweeps x ↦ K(x,[0,y]) (exactly one of the two).
    Kernel {
        input: PathBuf,
        /// Conditioning point; output columns `y,K`.
        #[arg(long)]
        x: Option<f64>,
        /// Fixed level; output columns `x,K` over interior grid points.
        #[arg(long)]
        y: Option<f64>,
        /// Number of grid steps.
        #[arg(long, default_value_t = 1025)]
        grid: usize,
    },
    /// Concordance measures, singular mass and region flags as JSON.
    Measures {
        input: PathBuf,
        /// Append independent midpoint-quadrature cross-checks of τ and ρ.
        #[arg(long)]
        oracle: bool,
        /// Quadrature resolution for `--oracle`.
        #[arg(long, default_value_t = 1025)]
        grid: usize,
    },
    /// Star (Markov) product of two diagonals, projected back into the
    /// class, as JSON with a projection error bound.
    Star {
        d1: PathBuf,
        d2: PathBuf,
        /// Projection grid resolution.
        #[arg(long, default_value_t = 1025)]
        grid: usize,
    },
    /// Iterate the star product of a diagonal with itself to its idempotent
    /// limit. JSON (limit, fitted parameter) on stdout; per-iteration
    /// sup-distance trace CSV to `--out`. Exit 4 if not converged.
    Iterate {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Iterate interpolation grid resolution.
        #[arg(long, default_value_t = 1025)]
        grid: usize,
    },
    /// Draw samples from the copula as CSV (`u,v`).
    Sample {
        input: PathBuf,
        /// Number of points.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Plot-ready (τ, ρ)-region CSV (`tau,rho,source`) from family sweeps
    /// and random class members.
    Region {
        /// Points per selected generator.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated: lower,upper,power,mix,random, or "all".
        #[arg(long, default_value = "all")]
        families: String,
    },
    /// Diagonal of the star product of two Marshall–Olkin copulas, as JSON.
    Mo {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match dispatch(cli.command, &out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Exit-code contract: 2 malformed input, 3 validation/domain failure,
/// 4 non-convergence.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::MalformedKnots(_) => 2,
        Error::SearchFailure(_) => 4,
        _ => 3,
    }
}

fn read_to_string(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Parse a diagonal file and require class membership.
fn load_member(path: &PathBuf) -> Result<Diagonal> {
    let d = from_json(&read_to_string(path)?)?;
    let rep = validate_dlsl(&d, default_tol(&d));
    if !rep.is_member {
        let what = rep
            .violations
            .first()
            .map(|v| format!("{} (witness x = {}, magnitude {:.3e})", v.condition.as_str(), v.witness_x, v.magnitude))
            .unwrap_or_else(|| "unknown violation".into());
        return Err(Error::InvalidInput(format!(
            "{} is not a class member: {what}",
            path.display()
        )));
    }
    Ok(d)
}

/// Send a payload to `--out` (with trailing newline) or stdout.
fn emit(payload: &str, out: &Option<PathBuf>) -> Result<()> {
    let mut s = payload.to_string();
    if !s.ends_with('\n') {
        s.push('\n');
    }
    match out {
        Some(p) => std::fs::write(p, s)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Command, out: &Option<PathBuf>) -> Result<u8> {
    match cmd {
        Command::Validate { input, tol } => {
            let d = from_json(&read_to_string(&input)?)?;
            let rep = validate_dlsl(&d, tol);
            emit(&validation_json(&rep), out)?;
            Ok(if rep.is_member { 0 } else { 3 })
        }
        Command::Eval { input, x, y } => {
            let d = load_member(&input)?;
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                return Err(Error::Domain(format!("point ({x}, {y}) outside [0,1]²")));
            }
            emit(&fmt_float(surface(&d, x, y)), out)?;
            Ok(0)
        }
        Command::Kernel { input, x, y, grid } => {
            let d = load_member(&input)?;
            if grid < 2 {
                return Err(Error::Domain("--grid must be at least 2".into()));
            }
            let payload = match (x, y) {
                (Some(x), None) => {
                    let ys: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
                    let ks = ys
                        .iter()
                        .map(|&yy| kernel_cdf(&d, x, yy))
                        .collect::<Result<Vec<f64>>>()?;
                    csv_yk(&ys, &ks)
                }
                (None, Some(y)) => {
                    let xs: Vec<f64> = (1..grid).map(|i| i as f64 / grid as f64).collect();
                    let ks = xs
                        .iter()
                        .map(|&xx| kernel_cdf(&d, xx, y))
                        .collect::<Result<Vec<f64>>>()?;
                    csv_xk(&xs, &ks)
                }
                _ => {
                    return Err(Error::Parse(
                        "pass exactly one of --x (y-sweep) or --y (x-sweep)".into(),
                    ))
                }
            };
            emit(&payload, out)?;
            Ok(0)
        }
        Command::Measures {
            input,
            oracle,
            grid,
        } => {
            let d = load_member(&input)?;
            let r = report(&d);
            let cross = oracle.then(|| (tau_quadrature(&d, grid), rho_quadrature(&d, grid)));
            emit(&measures_json(&r, cross), out)?;
            Ok(0)
        }
        Command::Star { d1, d2, grid } => {
            let a = load_member(&d1)?;
            let b = load_member(&d2)?;
            let res = star(&a, &b, grid)?;
            emit(&star_json(&res.product, res.error_bound), out)?;
            Ok(0)
        }
        Command::Iterate {
            input,
            tol,
            max_iter,
            grid,
        } => {
            let d = load_member(&input)?;
            let t = iterate_star(&d, tol, max_iter, grid)?;
            println!("{}", iterate_json(&t));
            if let Some(p) = out {
                emit(&csv_trace(&t.sup_deltas), &Some(p.clone()))?;
            }
            Ok(if t.converged { 0 } else { 4 })
        }
        Command::Sample { input, n, seed } => {
            let d = load_member(&input)?;
            let batch = sample(&d, n, seed)?;
            emit(&csv_samples(&batch.points), out)?;
            Ok(0)
        }
        Command::Region { n, seed, families } => {
            let sel = FamilySelector::parse(&families)?;
            emit(&csv_region(&region_scan(n, seed, sel)), out)?;
            Ok(0)
        }
        Command::Mo { alpha, beta } => {
            let d = Diagonal::mo_star(alpha, beta)?;
            emit(&diagonal_json(&d), out)?;
            Ok(0)
        }
    }
}
