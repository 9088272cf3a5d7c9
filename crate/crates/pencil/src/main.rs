use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use pencil::harness::{self, emit, run_experiment, ExperimentConfig, HarnessError, Recipe};
use pencil::mtx::{read_matrix, write_matrix, MtxError};
use pencil::output::{write_atomic, write_json};
use pencil::report::{Complex, EigenvalueRepr, ShatterReportRepr};
use pencil_core::eigsolve::Mode;
use pencil_core::grid::{random_grid, Grid};
use pencil_core::linalg::{ref_eig, scale, solve};
use pencil_core::pseudospectra::{
    matrix_pseudospec_levels, pseudospec_levels, verify_shattering, Region, DEFAULT_SAMPLES_PER_EDGE,
};
use pencil_core::rpd::{diag_error, diag_error_right, diag_residuals, efficiency_factor, perturb, rpd, RpdOptions};
use pencil_core::{c64, Pencil, RngStream};
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_NO_SPLIT: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_ACCURACY: u8 = 4;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  usage error or invalid parameter
  2  no admissible split found (NoSplitFound)
  3  I/O error or malformed/mismatched input files
  4  accuracy miss: diag error above log10(eps), or grid not shattered";

#[derive(Parser)]
#[command(name = "pencil", version, about = "Randomized inverse-free diagonalization of matrix pencils", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize (A, B); writes S.mtx, T.mtx and D.json into --out.
    Diagonalize {
        #[command(flatten)]
        input: PencilInput,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write log10[(1+|z|)/σmin(A − zB)] on a lattice as CSV.
    Pseudospectrum {
        #[command(flatten)]
        input: PencilInput,
        /// re_min,re_max,im_min,im_max
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true, value_parser = parse_region)]
        region: Region,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..=4096))]
        resolution: u64,
        /// Also emit log10‖(B⁻¹A − z)⁻¹‖₂ in a `product` column.
        #[arg(long)]
        product: bool,
        #[arg(long, default_value = "pseudospectrum.csv")]
        out: PathBuf,
    },
    /// Check that a random grid shatters the eps-pseudospectrum of the perturbed pencil.
    ShatterCheck {
        #[command(flatten)]
        input: PencilInput,
        #[arg(long, default_value_t = 1e-8, value_parser = parse_eps)]
        eps: f64,
        /// Perturbation size; 0 checks the pencil as given.
        #[arg(long, default_value_t = 0.0, value_parser = parse_nonnegative)]
        gamma: f64,
        /// Grid spacing.
        #[arg(long, value_parser = parse_positive)]
        omega: f64,
        /// Fix the lower-left grid corner (re,im) instead of drawing it.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        origin: Option<Complex>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_EDGE as u64, value_parser = clap::value_parser!(u64).range(2..=100_000))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "shatter.json")]
        out: PathBuf,
    },
    /// Run a batch experiment; writes summary.json, runs.csv and histograms.csv into --out.
    Experiment(ExperimentArgs),
    /// Like `experiment`, pairing every run with the inversion-based comparator.
    Compare(ExperimentArgs),
}

#[derive(Args)]
struct PencilInput {
    /// Matrix Market file for A.
    a: PathBuf,
    /// Matrix Market file for B.
    b: PathBuf,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value_t = 1e-6, value_parser = parse_eps)]
    eps: f64,
    #[arg(long, default_value = "practical", value_parser = parse_mode)]
    mode: Mode,
    /// Subproblems of at most this size go to QZ.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    cutoff: u64,
    /// Grid spacing, overriding the mode's default.
    #[arg(long, value_parser = parse_positive)]
    omega: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// planted, jordan, singular_b, singular_pencil or custom.
    name: Recipe,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    #[arg(long, default_value_t = 1e-6, value_parser = parse_eps)]
    eps: f64,
    #[arg(long, default_value = "practical", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to 50 for singular_b, 1 otherwise.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    cutoff: Option<u64>,
    #[arg(long, default_value = "experiment")]
    out: PathBuf,
    /// Input pencil for the custom recipe.
    #[arg(long = "a", requires = "b_path")]
    a_path: Option<PathBuf>,
    #[arg(long = "b", requires = "a_path")]
    b_path: Option<PathBuf>,
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("eps must lie in (0, 1), got {x}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be a positive finite number, got {x}"))
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be a non-negative finite number, got {x}"))
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "practical" => Ok(Mode::Practical),
        "theoretical" => Ok(Mode::Theoretical),
        _ => Err(format!("mode must be 'practical' or 'theoretical', got '{s}'")),
    }
}

fn parse_floats(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(format!("expected {count} comma-separated finite numbers, got '{s}'"));
    }
    Ok(v)
}

fn parse_region(s: &str) -> Result<Region, String> {
    let v = parse_floats(s, 4)?;
    if v[0] >= v[1] || v[2] >= v[3] {
        return Err(format!("region needs re_min < re_max and im_min < im_max, got '{s}'"));
    }
    Ok(Region { re_min: v[0], re_max: v[1], im_min: v[2], im_max: v[3] })
}

fn parse_complex(s: &str) -> Result<Complex, String> {
    let v = parse_floats(s, 2)?;
    Ok(Complex { re: v[0], im: v[1] })
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct InputError(String);

#[derive(Debug, thiserror::Error)]
#[error("accuracy miss: {0}")]
struct AccuracyMiss(String);

fn display_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn load_pencil(a_path: &Path, b_path: &Path) -> Result<Pencil> {
    let a = read_matrix(a_path)?;
    let b = read_matrix(b_path)?;
    for (m, path) in [(&a, a_path), (&b, b_path)] {
        if m.nrows() != m.ncols() {
            return Err(InputError(format!("{} is {}x{}, expected a square matrix", display_name(path), m.nrows(), m.ncols())).into());
        }
    }
    if a.nrows() != b.nrows() {
        return Err(InputError(format!(
            "size mismatch: {} is {}x{} but {} is {}x{}",
            display_name(a_path),
            a.nrows(),
            a.ncols(),
            display_name(b_path),
            b.nrows(),
            b.ncols()
        ))
        .into());
    }
    if a.nrows() == 0 {
        return Err(InputError("input matrices are empty".into()).into());
    }
    Ok(Pencil::new(a, b)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn cmd_diagonalize(input: &PencilInput, solver: &SolverFlags, seed: u64, out: &Path) -> Result<()> {
    let p = load_pencil(&input.a, &input.b)?;
    let (normalized, c) = p.normalized()?;
    let opts = RpdOptions { mode: solver.mode, cutoff: solver.cutoff as usize, omega: solver.omega };
    let res = rpd(&normalized, solver.eps, &opts, &RngStream::new(seed))?;
    let err = diag_error(&normalized, &res)?;
    let success = err <= solver.eps.log10();

    create_dir(out)?;
    write_matrix(&out.join("S.mtx"), &scale(&res.s, c64::new(c, 0.0)))?;
    write_matrix(&out.join("T.mtx"), &res.t)?;
    let eigenvalues: Vec<EigenvalueRepr> = res.d.iter().map(|&e| e.into()).collect();
    let to_complex = |v: &[c64]| v.iter().map(|&z| Complex::from(z)).collect::<Vec<_>>();
    let metrics = json!({
        "diag_error": err,
        "diag_error_right": diag_error_right(&normalized, &res)?,
        "residuals": diag_residuals(&normalized, &res)?,
        "success": success,
        "efficiency_factor": efficiency_factor(&res.stats, p.n(), opts.cutoff),
        "splits": res.stats.splits,
        "delegated": res.stats.delegated,
    });
    let d = json!({
        "n": p.n(),
        "eps": solver.eps,
        "mode": solver.mode,
        "cutoff": opts.cutoff,
        "seed": seed,
        "scale": c,
        "files": { "S": "S.mtx", "T": "T.mtx" },
        "eigenvalues": eigenvalues,
        "d1": to_complex(&res.d1),
        "d2": to_complex(&res.d2),
        "gamma": res.gamma,
        "grid": res.grid,
        "params": res.params,
        "metrics": metrics,
    });
    let d_path = out.join("D.json");
    write_json(&d_path, &d).with_context(|| format!("writing {}", d_path.display()))?;
    println!("{}", serde_json::to_string(&metrics)?);
    if !success {
        return Err(AccuracyMiss(format!("diag error {err:.3} > log10(eps) = {:.3}", solver.eps.log10())).into());
    }
    Ok(())
}

fn cmd_pseudospectrum(input: &PencilInput, region: &Region, resolution: usize, product: bool, out: &Path) -> Result<()> {
    let p = load_pencil(&input.a, &input.b)?;
    let field = pseudospec_levels(&p, region, resolution)?;
    let product_field = if product { Some(matrix_pseudospec_levels(&solve(&p.b, &p.a)?, region, resolution)?) } else { None };
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["re", "im", "pencil"];
    if product {
        header.push("product");
    }
    writer.write_record(&header)?;
    for (i, pt) in field.points.iter().enumerate() {
        let mut row = vec![pt.re.to_string(), pt.im.to_string(), pt.value.to_string()];
        if let Some(f) = &product_field {
            row.push(f.points[i].value.to_string());
        }
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| anyhow::anyhow!(e.to_string()))?;
    write_atomic(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_shatter_check(
    input: &PencilInput,
    eps: f64,
    gamma: f64,
    omega: f64,
    origin: Option<Complex>,
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let p = load_pencil(&input.a, &input.b)?;
    let rng = RngStream::new(seed);
    let perturbed = if gamma > 0.0 { perturb(&p, gamma, &rng) } else { p };
    let grid = match origin {
        Some(z) => {
            let side = (8.0 / omega).ceil() as u64;
            Grid::new(c64::new(z.re, z.im), omega, side, side)?
        }
        None => random_grid(omega, &rng.child("grid"))?,
    };
    let oracle = ref_eig(&perturbed)?;
    let report = verify_shattering(&perturbed, &grid, eps, samples, &oracle)?;
    let body = json!({
        "eps": eps,
        "gamma": gamma,
        "seed": seed,
        "grid": grid,
        "report": ShatterReportRepr::from(&report),
    });
    write_json(out, &body).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", json!({ "shattered": report.shattered, "violations": report.violations.len() }));
    if !report.shattered {
        return Err(AccuracyMiss(format!("grid does not shatter: {} violation(s)", report.violations.len())).into());
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs, comparator: bool) -> Result<()> {
    let custom = match (&args.a_path, &args.b_path) {
        (Some(a), Some(b)) => Some(load_pencil(a, b)?),
        _ => None,
    };
    let mut cfg = ExperimentConfig::new(args.name);
    cfg.n = match (args.n, &custom) {
        (Some(n), _) => n as usize,
        (None, Some(p)) => p.n(),
        (None, None) => cfg.n,
    };
    cfg.eps_user = args.eps;
    cfg.mode = args.mode;
    cfg.runs = args.runs as usize;
    cfg.seed = args.seed;
    cfg.comparator = comparator;
    if let Some(c) = args.cutoff {
        cfg.cutoff = c as usize;
    }
    let summary = run_experiment(&cfg, custom.as_ref())?;
    let files = emit(&summary, &args.out)?;
    println!(
        "{}",
        json!({
            "failures": summary.failures,
            "comparator_failures": summary.comparator_failures,
            "runs": summary.runs.len(),
            "statistics": summary.statistics,
            "summary": files.summary,
        })
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Diagonalize { input, solver, seed, out } => cmd_diagonalize(input, solver, *seed, out),
        Command::Pseudospectrum { input, region, resolution, product, out } => {
            cmd_pseudospectrum(input, region, *resolution as usize, *product, out)
        }
        Command::ShatterCheck { input, eps, gamma, omega, origin, samples, seed, out } => {
            cmd_shatter_check(input, *eps, *gamma, *omega, *origin, *samples as usize, *seed, out)
        }
        Command::Experiment(args) => cmd_experiment(args, false),
        Command::Compare(args) => cmd_experiment(args, true),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<pencil_core::Error>() {
            if matches!(e, pencil_core::Error::NoSplitFound { .. }) {
                return EXIT_NO_SPLIT;
            }
        }
        if let Some(HarnessError::Core(pencil_core::Error::NoSplitFound { .. })) = cause.downcast_ref::<HarnessError>() {
            return EXIT_NO_SPLIT;
        }
        if let Some(HarnessError::Io { .. }) = cause.downcast_ref::<HarnessError>() {
            return EXIT_IO;
        }
        if cause.is::<MtxError>() || cause.is::<InputError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
        if cause.is::<AccuracyMiss>() {
            return EXIT_ACCURACY;
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(n) = harness::thread_count() {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error[{code}]: {e:#}");
            ExitCode::from(code)
        }
    }
}
