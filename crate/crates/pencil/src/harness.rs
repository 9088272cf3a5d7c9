//! Batch experiments over the built-in recipes, with JSON/CSV emission.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use pencil_core::comparator::comparator_inversion;
use pencil_core::eigsolve::Mode;
use pencil_core::linalg::{ref_eig, spectral_norm};
use pencil_core::rpd::{
    diag_error, diag_residuals, efficiency_factor, eigen_error, forward_check, gap_and_kappa_v, matched_errors, rpd,
    DiagResult, ForwardCheck, RpdOptions,
};
use pencil_core::{c64, recipes, Eigenvalue, Pencil, RngStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{write_csv, write_json};
use crate::report::EigenvalueRepr;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PENCIL_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pencil_core::Error),
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Planted,
    Jordan,
    SingularB,
    SingularPencil,
    Custom,
}

impl Recipe {
    pub fn default_n(self) -> usize {
        match self {
            Recipe::Planted | Recipe::Jordan => 50,
            Recipe::SingularB => 200,
            Recipe::SingularPencil => 4,
            Recipe::Custom => 0,
        }
    }

    pub fn default_cutoff(self) -> usize {
        match self {
            Recipe::SingularB => 50,
            _ => 1,
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recipe::Planted => "planted",
            Recipe::Jordan => "jordan",
            Recipe::SingularB => "singular_b",
            Recipe::SingularPencil => "singular_pencil",
            Recipe::Custom => "custom",
        })
    }
}

impl FromStr for Recipe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "planted" => Ok(Recipe::Planted),
            "jordan" => Ok(Recipe::Jordan),
            "singular_b" => Ok(Recipe::SingularB),
            "singular_pencil" => Ok(Recipe::SingularPencil),
            "custom" => Ok(Recipe::Custom),
            _ => Err(format!("unknown recipe '{s}' (planted, jordan, singular_b, singular_pencil, custom)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: Recipe,
    pub n: usize,
    pub eps_user: f64,
    pub runs: usize,
    pub seed: u64,
    pub cutoff: usize,
    pub comparator: bool,
    pub mode: Mode,
}

impl ExperimentConfig {
    pub fn new(name: Recipe) -> Self {
        ExperimentConfig {
            name,
            n: name.default_n(),
            eps_user: 1e-6,
            runs: 100,
            seed: 0,
            cutoff: name.default_cutoff(),
            comparator: false,
            mode: Mode::Practical,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if !(self.eps_user > 0.0 && self.eps_user < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps_user));
        }
        if self.cutoff == 0 {
            return bad("cutoff must be at least 1".into());
        }
        match self.name {
            Recipe::Planted | Recipe::Jordan | Recipe::SingularB if self.n < 2 => {
                bad(format!("{} needs n >= 2, got {}", self.name, self.n))
            }
            Recipe::SingularPencil if self.n != 4 => bad(format!("singular_pencil is 4x4, got n = {}", self.n)),
            _ => Ok(()),
        }
    }
}

/// The experiment's input pencil, drawn once from the `recipe` child of the seed.
pub fn build_pencil(cfg: &ExperimentConfig, custom: Option<&Pencil>) -> Result<Pencil, HarnessError> {
    let rng = RngStream::new(cfg.seed).child("recipe");
    Ok(match cfg.name {
        Recipe::Planted => recipes::planted(cfg.n, &rng)?,
        Recipe::Jordan => recipes::jordan(cfg.n)?,
        Recipe::SingularB => recipes::singular_b(cfg.n, &rng)?,
        Recipe::SingularPencil => recipes::singular_pencil(),
        Recipe::Custom => {
            let p = custom.ok_or_else(|| HarnessError::Config("custom experiments need an input pencil".into()))?;
            if p.n() != cfg.n {
                return Err(HarnessError::Config(format!("custom pencil is {0}x{0}, config says n = {1}", p.n(), cfg.n)));
            }
            p.normalized()?.0
        }
    })
}

/// What computed eigenvalues are compared against.
#[derive(Clone, Debug)]
pub enum Truth {
    /// Exact spectrum; errors are matched after sorting by real part.
    Known(Vec<c64>),
    /// Oracle spectrum, possibly with infinities; errors sorted by magnitude.
    Oracle(Vec<Eigenvalue>),
    /// A single eigenvalue of interest; the error is the distance of the nearest approximation.
    Target(c64),
    Unavailable,
}

pub fn truth_for(cfg: &ExperimentConfig, p: &Pencil) -> Truth {
    match cfg.name {
        Recipe::Planted => Truth::Known(recipes::planted_spectrum(cfg.n).into_iter().map(|x| c64::new(x, 0.0)).collect()),
        Recipe::Jordan => Truth::Known(vec![c64::new(0.0, 0.0); cfg.n]),
        Recipe::SingularPencil => Truth::Target(c64::new(1.0, 0.0)),
        Recipe::SingularB | Recipe::Custom => ref_eig(p).map(Truth::Oracle).unwrap_or(Truth::Unavailable),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub m: usize,
    pub k: usize,
}

/// Metrics of one diagonalization attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub diag_error: Option<f64>,
    pub eigen_error: Option<f64>,
    pub success: bool,
    pub splits: Vec<Split>,
    pub lines_per_split: Vec<usize>,
    pub efficiency_factor: Option<f64>,
    pub wall_time_s: f64,
    /// Per-eigenvalue errors in matched order, when the spectrum is known.
    pub eigenvalue_errors: Vec<f64>,
    pub forward: Option<ForwardCheck>,
    /// Whether every matched error is within the forward bound; `None` when the bound does not apply.
    pub forward_ok: Option<bool>,
    pub eigenvalues: Vec<EigenvalueRepr>,
    pub error: Option<String>,
}

impl MethodOutcome {
    fn failed(error: String, wall_time_s: f64) -> Self {
        MethodOutcome {
            diag_error: None,
            eigen_error: None,
            success: false,
            splits: Vec::new(),
            lines_per_split: Vec::new(),
            efficiency_factor: None,
            wall_time_s,
            eigenvalue_errors: Vec::new(),
            forward: None,
            forward_ok: None,
            eigenvalues: Vec::new(),
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    #[serde(flatten)]
    pub rpd: MethodOutcome,
    pub comparator: Option<MethodOutcome>,
}

/// Gap and unit-column `κ_V` of the input pencil, when its `B` is invertible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conditioning {
    pub gap: f64,
    pub kappa_v: f64,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    pencil: &'a Pencil,
    truth: &'a Truth,
    conditioning: Option<Conditioning>,
}

fn evaluate(ctx: &Context<'_>, outcome: pencil_core::Result<DiagResult>, wall_time_s: f64) -> MethodOutcome {
    let res = match outcome {
        Ok(res) => res,
        Err(e) => return MethodOutcome::failed(e.to_string(), wall_time_s),
    };
    let cfg = ctx.cfg;
    let diag = diag_error(ctx.pencil, &res).ok();
    let finite: Vec<c64> = res.d.iter().filter_map(|e| e.finite()).collect();
    let mut eigenvalue_errors = Vec::new();
    let eigen = match ctx.truth {
        Truth::Known(values) if finite.len() == values.len() => {
            eigenvalue_errors = matched_errors(&finite, values).unwrap_or_default();
            Some(eigenvalue_errors.iter().sum::<f64>() / values.len().max(1) as f64)
        }
        Truth::Known(_) => Some(f64::INFINITY),
        Truth::Oracle(values) => eigen_error(&res.d, values).ok(),
        Truth::Target(z) => finite.iter().map(|x| (x - z).norm()).min_by(f64::total_cmp),
        Truth::Unavailable => None,
    };
    let forward = match (ctx.conditioning, diag_residuals(ctx.pencil, &res)) {
        (Some(c), Ok(r)) => forward_check(ctx.pencil, &r, c.gap, c.kappa_v).ok(),
        _ => None,
    };
    let forward_ok = match forward {
        Some(f) if f.applies && !eigenvalue_errors.is_empty() => {
            Some(eigenvalue_errors.iter().all(|&e| e <= f.eig_bound))
        }
        _ => None,
    };
    MethodOutcome {
        diag_error: diag,
        eigen_error: eigen,
        success: diag.is_some_and(|d| d <= cfg.eps_user.log10()),
        splits: res.stats.splits.iter().map(|s| Split { m: s.m, k: s.k }).collect(),
        lines_per_split: res.stats.splits.iter().map(|s| s.lines_checked).collect(),
        efficiency_factor: Some(efficiency_factor(&res.stats, ctx.pencil.n(), cfg.cutoff)),
        wall_time_s,
        eigenvalue_errors,
        forward,
        forward_ok,
        eigenvalues: res.d.iter().map(|&e| e.into()).collect(),
        error: None,
    }
}

fn run_once(ctx: &Context<'_>, run: usize) -> RunRecord {
    let cfg = ctx.cfg;
    let rng = RngStream::new(cfg.seed).child(&format!("run{run}"));
    let opts = RpdOptions { mode: cfg.mode, cutoff: cfg.cutoff, omega: None };
    let start = Instant::now();
    let out = rpd(ctx.pencil, cfg.eps_user, &opts, &rng);
    let rpd_outcome = evaluate(ctx, out, start.elapsed().as_secs_f64());
    let comparator = cfg.comparator.then(|| {
        let start = Instant::now();
        let out = comparator_inversion(ctx.pencil, cfg.eps_user, &opts, &rng);
        evaluate(ctx, out, start.elapsed().as_secs_f64())
    });
    RunRecord { run, rpd: rpd_outcome, comparator }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; values outside the range land in the end bins.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn build(values: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for v in values.into_iter().filter(|v| v.is_finite()) {
            let i = ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
            counts[i] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histograms {
    /// `k/m` over splits of subproblems with `m > 3`.
    pub split_fraction: Histogram,
    pub efficiency_factor: Histogram,
    pub lines_per_split: Histogram,
}

/// Smallest subproblem size included in the split histogram.
pub const HISTOGRAM_MIN_M: usize = 4;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Statistics {
    pub median_diag_error: Option<f64>,
    pub median_eigen_error: Option<f64>,
    pub max_eigen_error: Option<f64>,
    pub median_efficiency_factor: Option<f64>,
    pub min_split_fraction: Option<f64>,
    pub max_split_fraction: Option<f64>,
    pub comparator_median_diag_error: Option<f64>,
    pub comparator_median_eigen_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub failures: usize,
    pub comparator_failures: Option<usize>,
    /// `(‖A‖₂, ‖B‖₂)` of the input pencil.
    pub pencil_norms: (f64, f64),
    pub conditioning: Option<Conditioning>,
    pub threads: usize,
    pub runs: Vec<RunRecord>,
    pub histograms: Histograms,
    pub statistics: Statistics,
}

pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Worker count from [`THREADS_ENV`], or rayon's default.
pub fn thread_count() -> Result<usize, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!("{THREADS_ENV} must be a positive integer, got '{s}'"))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

pub fn summarize(cfg: &ExperimentConfig, runs: Vec<RunRecord>) -> (usize, Option<usize>, Histograms, Statistics) {
    let splits = || {
        runs.iter()
            .flat_map(|r| r.rpd.splits.iter())
            .filter(|s| s.m >= HISTOGRAM_MIN_M)
            .map(|s| s.k as f64 / s.m as f64)
    };
    let max_lines = runs.iter().flat_map(|r| r.rpd.lines_per_split.iter().copied()).max().unwrap_or(1).max(1);
    let histograms = Histograms {
        split_fraction: Histogram::build(splits(), 0.0, 1.0, 20),
        efficiency_factor: Histogram::build(runs.iter().filter_map(|r| r.rpd.efficiency_factor), 1.0, 5.0, 16),
        lines_per_split: Histogram::build(
            runs.iter().flat_map(|r| r.rpd.lines_per_split.iter().map(|&l| l as f64)),
            0.5,
            max_lines as f64 + 0.5,
            max_lines,
        ),
    };
    let comparators = || runs.iter().filter_map(|r| r.comparator.as_ref());
    let statistics = Statistics {
        median_diag_error: median(runs.iter().filter_map(|r| r.rpd.diag_error)),
        median_eigen_error: median(runs.iter().filter_map(|r| r.rpd.eigen_error)),
        max_eigen_error: runs.iter().filter_map(|r| r.rpd.eigen_error).max_by(f64::total_cmp),
        median_efficiency_factor: median(runs.iter().filter_map(|r| r.rpd.efficiency_factor)),
        min_split_fraction: splits().min_by(f64::total_cmp),
        max_split_fraction: splits().max_by(f64::total_cmp),
        comparator_median_diag_error: median(comparators().filter_map(|c| c.diag_error)),
        comparator_median_eigen_error: median(comparators().filter_map(|c| c.eigen_error)),
    };
    let failures = runs.iter().filter(|r| !r.rpd.success).count();
    let comparator_failures = cfg.comparator.then(|| comparators().filter(|c| !c.success).count());
    (failures, comparator_failures, histograms, statistics)
}

/// Runs `cfg.runs` independent diagonalizations (and paired comparator runs
/// when enabled) of the recipe pencil in parallel.
pub fn run_experiment(cfg: &ExperimentConfig, custom: Option<&Pencil>) -> Result<Summary, HarnessError> {
    cfg.validate()?;
    let pencil = build_pencil(cfg, custom)?;
    let truth = truth_for(cfg, &pencil);
    let conditioning = match cfg.name {
        Recipe::Planted | Recipe::Custom => {
            gap_and_kappa_v(&pencil).ok().map(|(gap, kappa_v)| Conditioning { gap, kappa_v })
        }
        _ => None,
    };
    let ctx = Context { cfg, pencil: &pencil, truth: &truth, conditioning };
    let threads = thread_count()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let runs: Vec<RunRecord> = pool.install(|| (0..cfg.runs).into_par_iter().map(|i| run_once(&ctx, i)).collect());
    let (failures, comparator_failures, histograms, statistics) = summarize(cfg, runs.clone());
    Ok(Summary {
        config: cfg.clone(),
        failures,
        comparator_failures,
        pencil_norms: (spectral_norm(&pencil.a)?, spectral_norm(&pencil.b)?),
        conditioning,
        threads,
        runs,
        histograms,
        statistics,
    })
}

#[derive(Serialize)]
struct RunRow {
    run: usize,
    diag_error: Option<f64>,
    eigen_error: Option<f64>,
    success: bool,
    splits: usize,
    max_lines_per_split: usize,
    efficiency_factor: Option<f64>,
    wall_time_s: f64,
    comparator_diag_error: Option<f64>,
    comparator_eigen_error: Option<f64>,
    comparator_success: Option<bool>,
    error: Option<String>,
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    histogram: &'a str,
    lo: f64,
    hi: f64,
    count: usize,
}

/// Paths written by [`emit`].
#[derive(Clone, Debug)]
pub struct Emitted {
    pub summary: PathBuf,
    pub runs: PathBuf,
    pub histograms: PathBuf,
}

/// Writes `summary.json`, `runs.csv` and `histograms.csv` into `dir`.
pub fn emit(summary: &Summary, dir: &Path) -> Result<Emitted, HarnessError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let out = Emitted {
        summary: dir.join("summary.json"),
        runs: dir.join("runs.csv"),
        histograms: dir.join("histograms.csv"),
    };
    write_json(&out.summary, summary).map_err(io(&out.summary))?;

    let rows: Vec<RunRow> = summary
        .runs
        .iter()
        .map(|r| RunRow {
            run: r.run,
            diag_error: r.rpd.diag_error,
            eigen_error: r.rpd.eigen_error,
            success: r.rpd.success,
            splits: r.rpd.splits.len(),
            max_lines_per_split: r.rpd.lines_per_split.iter().copied().max().unwrap_or(0),
            efficiency_factor: r.rpd.efficiency_factor,
            wall_time_s: r.rpd.wall_time_s,
            comparator_diag_error: r.comparator.as_ref().and_then(|c| c.diag_error),
            comparator_eigen_error: r.comparator.as_ref().and_then(|c| c.eigen_error),
            comparator_success: r.comparator.as_ref().map(|c| c.success),
            error: r.rpd.error.clone(),
        })
        .collect();
    write_csv(&out.runs, &rows).map_err(io(&out.runs))?;

    let h = &summary.histograms;
    let mut hist_rows = Vec::new();
    for (name, hist) in [
        ("split_fraction", &h.split_fraction),
        ("efficiency_factor", &h.efficiency_factor),
        ("lines_per_split", &h.lines_per_split),
    ] {
        for (i, &count) in hist.counts.iter().enumerate() {
            hist_rows.push(HistogramRow { histogram: name, lo: hist.edges[i], hi: hist.edges[i + 1], count });
        }
    }
    write_csv(&out.histograms, &hist_rows).map_err(io(&out.histograms))?;
    Ok(out)
}
