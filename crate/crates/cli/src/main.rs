//! `slspec`: spectra, delta tables, asymptotic reports, expansions and
//! forced-problem checks from the command line.
//!
//! Exit status: 0 on success, 1 when `validate` finds a failing criterion,
//! 2 for unusable input, 3 when a computation or output write fails.

mod config;
mod output;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slspec::angle::parse_angle;
use slspec::asymptotics::{asymptotic_report, Decomposition, SeriesKind, SeriesTerms};
use slspec::delta::delta_table;
use slspec::expansion::{report_from, Expansion, SUP_GRID};
use slspec::greens::{bvp_decay_check, zone_bound_check};
use slspec::numeric::linspace;
use slspec::spectrum::{find_eigenvalues, wdot_identity_check};
use slspec::validation::run_all;
use slspec::BoundaryParams;

use crate::output::{csv, dat, emit, json, Cell};

const THREADS_VAR: &str = "SLSPEC_THREADS";

#[derive(Parser)]
#[command(name = "slspec", version, about = "Sturm-Liouville spectral toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn angle(text: &str) -> Result<f64, String> {
    parse_angle(text).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, norming constants and the Wronskian-derivative check.
    Spectrum {
        /// Potential JSON file.
        #[arg(long)]
        q: PathBuf,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        beta: f64,
        /// Largest index.
        #[arg(long = "N")]
        n: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of delta_n with d_n, e_n, g_n.
    Delta {
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Computed versus predicted eigenvalues and norming constants, plus the
    /// l and s series.
    Asymptotics {
        #[arg(long)]
        q: PathBuf,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        /// Fit window as `lo,hi`.
        #[arg(long, default_value = "10,100", value_parser = window)]
        window: (usize, usize),
        /// Samples of each series on [0, 2 pi].
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Eigenfunction expansion of a target function from a scenario file.
    Expand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decay of the forced solution and the complex-zone bounds (alpha = pi).
    Greens {
        #[arg(long)]
        q: PathBuf,
        #[arg(long, value_parser = angle, allow_hyphen_values = true)]
        beta: f64,
        /// `sawtooth`, a constant, or a JSON function file.
        #[arg(long, default_value = "1")]
        f: String,
        #[arg(long, default_value_t = 5)]
        k_min: usize,
        #[arg(long, default_value_t = 50)]
        k_max: usize,
        /// Zone-check samples per axis.
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Runs the acceptance suite.
    Validate {
        #[arg(long, default_value = "default")]
        corpus: String,
    },
}

fn window(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = text.split_once(',').ok_or("expected lo,hi")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("window start exceeds its end".into());
    }
    Ok((lo, hi))
}

enum Failure {
    Input(String),
    Numeric(String),
    Acceptance,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Acceptance => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<slspec::Error> for Failure {
    fn from(e: slspec::Error) -> Self {
        use slspec::Error::*;
        match e {
            InvalidPotential(_) | OutOfDomain(_) | InvalidBoundary(_) | InvalidArgument(_) | Json(_) => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("write failed: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn boundary(alpha: f64, beta: f64) -> Result<BoundaryParams, Failure> {
    BoundaryParams::new(alpha, beta).map_err(|e| Failure::Input(e.to_string()))
}

fn potential(path: &Path) -> Result<slspec::Potential, Failure> {
    config::load_potential(path).map_err(Failure::Input)
}

fn out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(Failure::from)
}

fn spectrum(q: &Path, alpha: f64, beta: f64, n: usize, out: Option<&Path>) -> Outcome {
    let bp = boundary(alpha, beta)?;
    let q = potential(q)?;
    let eig = find_eigenvalues(&q, bp, n)?;
    let rows: Vec<Vec<Cell>> = eig
        .iter()
        .map(|e| {
            vec![
                e.n.into(),
                e.lambda.into(),
                e.mu.into(),
                e.a.into(),
                e.b.into(),
                e.beta_ratio.into(),
                wdot_identity_check(&q, bp, e).into(),
            ]
        })
        .collect();
    let header = ["n", "lambda", "mu", "a", "b", "beta_ratio", "wdot_relerr"];
    emit(out, &csv(&header, &rows))?;
    Ok(())
}

fn delta(alpha: f64, beta: f64, n_min: usize, n_max: usize, out: Option<&Path>) -> Outcome {
    boundary(alpha, beta)?;
    let recs = delta_table(n_min, n_max, alpha, beta)?;
    let rows: Vec<Vec<Cell>> = recs
        .iter()
        .map(|r| vec![r.n.into(), r.delta.into(), r.d.into(), r.e.into(), r.g.into()])
        .collect();
    emit(out, &csv(&["n", "delta", "d", "e", "g"], &rows))?;
    Ok(())
}

fn asymptotics(
    q: &Path,
    alpha: f64,
    beta: f64,
    n_max: usize,
    win: (usize, usize),
    points: usize,
    dir: &Path,
) -> Outcome {
    let bp = boundary(alpha, beta)?;
    let q = potential(q)?;
    let report = asymptotic_report(&q, bp, n_max, win)?;
    out_dir(dir)?;
    let rows: Vec<Vec<Cell>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.into(),
                r.lambda_computed.into(),
                r.lambda_predicted.into(),
                r.residual.into(),
                r.a_computed.into(),
                r.a_predicted.into(),
                r.a_residual.into(),
                r.b_computed.into(),
                r.b_predicted.into(),
                r.b_residual.into(),
            ]
        })
        .collect();
    let header = [
        "n",
        "lambda_computed",
        "lambda_predicted",
        "residual",
        "a_computed",
        "a_predicted",
        "a_residual",
        "b_computed",
        "b_predicted",
        "b_residual",
    ];
    fs::write(dir.join("report.csv"), csv(&header, &rows))?;
    fs::write(dir.join("summary.json"), json(&report))?;

    let xs = linspace(0.0, 2.0 * PI, points.max(2));
    let terms = SeriesTerms::new(&q, bp, n_max)?;
    let series = |kind| dat(xs.iter().map(|&x| (x, terms.eval(kind, x, n_max))));
    fs::write(dir.join("l.dat"), series(SeriesKind::L))?;
    fs::write(dir.join("s.dat"), series(SeriesKind::S))?;
    // The three-way split of l exists for alpha = pi with beta strictly inside (0, pi).
    if alpha == PI && beta > 0.0 {
        let dec = Decomposition::new(&q, beta, n_max)?;
        let parts: Vec<(f64, (f64, f64, f64))> = xs.iter().map(|&x| (x, dec.partial_sums(x, n_max))).collect();
        fs::write(dir.join("l1.dat"), dat(parts.iter().map(|(x, p)| (*x, p.0))))?;
        fs::write(dir.join("l2.dat"), dat(parts.iter().map(|(x, p)| (*x, p.1))))?;
        fs::write(dir.join("l3.dat"), dat(parts.iter().map(|(x, p)| (*x, p.2))))?;
    }
    Ok(())
}

fn expand(cfg: &Path, dir: &Path) -> Outcome {
    let sc = config::load_scenario(cfg).map_err(Failure::Input)?;
    let (lo, hi) = sc.interval.bounds();
    if !(lo < hi && (0.0..=PI).contains(&lo) && (0.0..=PI).contains(&hi)) {
        return Err(Failure::Input(format!(
            "subinterval [{lo}, {hi}] is not inside [0, pi]"
        )));
    }
    let exp = Expansion::new(&sc.q, sc.bp, &sc.f, *sc.n_list.last().unwrap())?;
    let report = report_from(&exp, &sc.f, &sc.n_list, sc.interval);
    out_dir(dir)?;
    let rows: Vec<Vec<Cell>> = report
        .rows
        .iter()
        .map(|r| vec![r.n.into(), r.err_restricted.into(), r.err_full.into()])
        .collect();
    fs::write(dir.join("report.csv"), csv(&["N", "err_restricted", "err_full"], &rows))?;
    let xs = linspace(0.0, PI, SUP_GRID);
    let sums = exp.partial_sums(&xs, &sc.n_list);
    for (n, s) in sc.n_list.iter().zip(&sums) {
        fs::write(
            dir.join(format!("partial_sum_N{n}.dat")),
            dat(xs.iter().copied().zip(s.iter().copied())),
        )?;
    }
    fs::write(dir.join("target.dat"), dat(xs.iter().map(|&x| (x, sc.f.eval(x)))))?;
    Ok(())
}

fn greens(q: &Path, beta: f64, f: &str, k_min: usize, k_max: usize, grid: usize, dir: &Path) -> Outcome {
    boundary(PI, beta)?;
    if k_min > k_max || grid < 2 {
        return Err(Failure::Input("need k_min <= k_max and grid >= 2".into()));
    }
    let q = potential(q)?;
    let f = config::parse_forcing(f).map_err(Failure::Input)?;
    let lambdas: Vec<f64> = (k_min..=k_max).map(|k| k as f64 + 0.25).collect();
    let decay = bvp_decay_check(&q, beta, &f, &lambdas)?;
    out_dir(dir)?;
    let rows: Vec<Vec<Cell>> = decay.rows.iter().map(|&(l, y)| vec![l.into(), y.into()]).collect();
    fs::write(dir.join("decay.csv"), csv(&["lambda", "max_abs_y"], &rows))?;
    let zone = zone_bound_check(grid);
    fs::write(dir.join("zone.json"), json(&zone))?;
    match decay.slope {
        Some(s) => println!("decay exponent {}", output::real(s)),
        None => println!("decay exponent skipped: zero forcing"),
    }
    println!("zone violations {} of {} points", zone.violations, zone.checked);
    Ok(())
}

fn validate(corpus: &str) -> Outcome {
    let entries =
        slspec::corpus::by_name(corpus).ok_or_else(|| Failure::Input(format!("unknown corpus {corpus:?}")))?;
    let outcomes = run_all(&entries, |o| println!("{}", o.line()));
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Acceptance)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("{THREADS_VAR} must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Numeric(e.to_string()))
}

fn run(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Spectrum { q, alpha, beta, n, out } => spectrum(&q, alpha, beta, n, out.as_deref()),
        Command::Delta {
            alpha,
            beta,
            n_min,
            n_max,
            out,
        } => delta(alpha, beta, n_min, n_max, out.as_deref()),
        Command::Asymptotics {
            q,
            alpha,
            beta,
            n_max,
            window,
            points,
            out_dir,
        } => asymptotics(&q, alpha, beta, n_max, window, points, &out_dir),
        Command::Expand { config, out_dir } => expand(&config, &out_dir),
        Command::Greens {
            q,
            beta,
            f,
            k_min,
            k_max,
            grid,
            out_dir,
        } => greens(&q, beta, &f, k_min, k_max, grid, &out_dir),
        Command::Validate { corpus } => validate(&corpus),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Numeric(m) => eprintln!("numeric failure: {m}"),
                Failure::Acceptance => eprintln!("acceptance suite failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
