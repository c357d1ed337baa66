//! Flag parsing, configuration merging and command dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use mcpdist_core::bounds::BoundSelector;
use mcpdist_core::metrics::{self, Metric, SweepOptions};
use mcpdist_core::{Grid, McpParams};

use crate::compute;
use crate::config::{
    Command, Format, RunSpec, SimSpec, SpacingArg, SweepSpec, DEFAULT_SEED, DEFAULT_STEPS,
    DEFAULT_SWEEP_STEPS,
};
use crate::error::{AppError, AppResult};
use crate::simulate::SimConfig;
use crate::table::Table;
use crate::validate;

/// Contact and nearest-neighbor distance distributions of the Matérn
/// cluster process.
#[derive(Debug, Parser)]
#[command(name = "mcpdist", version, allow_negative_numbers = true)]
pub struct Cli {
    /// What to compute; taken from the config file when omitted.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML run specification; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dimension n.
    #[arg(long)]
    pub dim: Option<u32>,
    /// Parent intensity.
    #[arg(long)]
    pub lambda_p: Option<f64>,
    /// Daughter intensity inside a cluster.
    #[arg(long, conflicts_with = "mean_points")]
    pub lambda_d: Option<f64>,
    /// Mean number of daughters per parent (m).
    #[arg(long)]
    pub mean_points: Option<f64>,
    /// Cluster radius.
    #[arg(long)]
    pub rd: Option<f64>,
    /// Smallest radius (smallest r_d for `deviation`).
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Largest radius (largest r_d for `deviation`). Defaults to where the
    /// exact CD CDF reaches 0.999, or to 100 λ_p^{-1/n} for `deviation`.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Grid points (200; 30 cluster radii for `deviation`).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
    /// Monte Carlo realizations per curve.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Base seed for simulation and randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulation window radius as a multiple of r_max + r_d.
    #[arg(long)]
    pub margin_factor: Option<f64>,
    /// Absolute tolerance of outer integrals.
    #[arg(long)]
    pub tol_abs: Option<f64>,
    /// Relative tolerance of outer integrals.
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; standard output when omitted or `-`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Validation suite (all when omitted).
    #[arg(long)]
    pub suite: Option<String>,
    /// Bound to sweep, such as CD_ub1 (repeatable; all when omitted).
    #[arg(long = "bound")]
    pub bounds: Vec<String>,
    /// Metric to sweep: KS, Avg or KL (repeatable; all when omitted).
    #[arg(long = "metric")]
    pub metrics: Vec<String>,
    /// Base radius grid points per cluster radius in a sweep.
    #[arg(long)]
    pub grid_points: Option<usize>,
}

impl Cli {
    /// Merges the config file (if any) with the flags.
    pub fn resolve(&self) -> AppResult<RunSpec> {
        let mut spec = match &self.config {
            Some(path) => RunSpec::load(path)?,
            None => RunSpec::new(
                self.command
                    .ok_or_else(|| AppError::Parameter("missing command".into()))?,
            ),
        };
        if let Some(c) = self.command {
            spec.command = c;
        }
        let p = &mut spec.params;
        set(&mut p.dim, self.dim);
        if self.lambda_p.is_some() {
            p.lambda_p = self.lambda_p;
        }
        if self.lambda_d.is_some() {
            p.lambda_d = self.lambda_d;
            p.mean_points = None;
        }
        if self.mean_points.is_some() {
            p.mean_points = self.mean_points;
            p.lambda_d = None;
        }
        if self.rd.is_some() {
            p.rd = self.rd;
        }
        set(&mut spec.grid.r_min, self.r_min);
        if self.r_max.is_some() {
            spec.grid.r_max = self.r_max;
        }
        if self.steps.is_some() {
            spec.grid.steps = self.steps;
        }
        set(&mut spec.grid.spacing, self.spacing);
        if self.samples.is_some() || self.seed.is_some() || self.margin_factor.is_some() {
            let sim = spec.sim.get_or_insert_with(SimSpec::default);
            set(&mut sim.samples, self.samples);
            set(&mut sim.seed, self.seed);
            set(&mut sim.margin_factor, self.margin_factor);
        }
        if !self.bounds.is_empty() || !self.metrics.is_empty() || self.grid_points.is_some() {
            let sweep = spec.sweep.get_or_insert_with(SweepSpec::default);
            if !self.bounds.is_empty() {
                sweep.bounds = self.bounds.clone();
            }
            if !self.metrics.is_empty() {
                sweep.metrics = self.metrics.clone();
            }
            if self.grid_points.is_some() {
                sweep.grid_points = self.grid_points;
            }
        }
        set(&mut spec.tolerance.abs, self.tol_abs);
        set(&mut spec.tolerance.rel, self.tol_rel);
        if self.threads.is_some() {
            spec.threads = self.threads;
        }
        if self.out.is_some() {
            spec.output.path = self.out.clone();
        }
        set(&mut spec.output.format, self.format);
        if self.suite.is_some() {
            spec.suite = self.suite.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Result of a command: the table to write and diagnostics for stderr.
#[derive(Debug)]
pub struct Outcome {
    /// Artifact.
    pub table: Table,
    /// Warnings, one per line.
    pub warnings: Vec<String>,
    /// Set when a validation check failed.
    pub failure: Option<String>,
}

fn radius_grid(spec: &RunSpec, p: &McpParams) -> AppResult<Grid> {
    let r_max = match spec.grid.r_max {
        Some(r) => r,
        None => compute::default_r_max(p)?,
    };
    if !(spec.grid.r_min < r_max) {
        return Err(AppError::Parameter("r_min must be below r_max".into()));
    }
    let steps = spec.grid.steps.unwrap_or(DEFAULT_STEPS);
    Ok(Grid::generate(
        spec.grid.r_min,
        r_max,
        steps,
        spec.grid.spacing.into(),
    )?)
}

fn selectors(names: &[String]) -> AppResult<Vec<BoundSelector>> {
    if names.is_empty() {
        return Ok(BoundSelector::ALL.to_vec());
    }
    names
        .iter()
        .map(|name| {
            BoundSelector::ALL
                .iter()
                .copied()
                .find(|s| format!("{}_{}", s.target().tag(), s.kind().tag()) == *name)
                .ok_or_else(|| AppError::Parameter(format!("unknown bound {name:?}")))
        })
        .collect()
}

fn metric_list(names: &[String]) -> AppResult<Vec<Metric>> {
    let all = [Metric::Ks, Metric::Avg, Metric::Kl];
    if names.is_empty() {
        return Ok(all.to_vec());
    }
    names
        .iter()
        .map(|name| {
            all.iter()
                .copied()
                .find(|m| m.tag().eq_ignore_ascii_case(name))
                .ok_or_else(|| AppError::Parameter(format!("unknown metric {name:?}")))
        })
        .collect()
}

fn deviation(spec: &RunSpec) -> AppResult<Outcome> {
    if spec.params.mean_points.is_none() {
        return Err(AppError::Parameter(
            "deviation sweeps hold m fixed; give --mean-points".into(),
        ));
    }
    let base = spec.params.build(Some(1.0))?;
    let steps = spec.grid.steps.unwrap_or(DEFAULT_SWEEP_STEPS);
    let grid = match spec.grid.r_max {
        None => metrics::rd_sweep_grid(&base, steps)?,
        Some(r_max) => {
            if !(spec.grid.r_min > 0.0 && spec.grid.r_min < r_max) {
                return Err(AppError::Parameter(
                    "the r_d sweep needs 0 < r_min < r_max".into(),
                ));
            }
            Grid::generate(spec.grid.r_min, r_max, steps, spec.grid.spacing.into())?
        }
    };
    let sweep = spec.sweep.clone().unwrap_or_default();
    let mut opts = SweepOptions {
        tolerance: spec.tolerance.build()?,
        ..SweepOptions::default()
    };
    if let Some(points) = sweep.grid_points {
        opts.grid_points = points;
    }
    let reports = compute::deviation_sweep_par(
        &base,
        &grid,
        &selectors(&sweep.bounds)?,
        &metric_list(&sweep.metrics)?,
        &opts,
    )?;
    Ok(Outcome {
        table: compute::deviation_table(&base, &grid, &reports),
        warnings: compute::certification_warnings(base.n()),
        failure: None,
    })
}

fn run_validate(spec: &RunSpec) -> AppResult<Outcome> {
    let seed = spec.sim.as_ref().map_or(DEFAULT_SEED, |s| s.seed);
    let names: Vec<&str> = match &spec.suite {
        Some(s) if s != "all" => vec![s.as_str()],
        _ => validate::SUITES.to_vec(),
    };
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    for name in names {
        let suite = validate::run_suite(name, seed)?;
        let failed = suite.iter().filter(|c| !c.passed).count();
        warnings.push(format!(
            "suite {name}: {} of {} checks passed",
            suite.len() - failed,
            suite.len()
        ));
        checks.extend(suite);
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.suite, c.name))
        .collect();
    let failure = (!failed.is_empty())
        .then(|| format!("{} failing checks ({})", failed.len(), failed.join("; ")));
    Ok(Outcome {
        table: validate::report_table(&checks, seed),
        warnings,
        failure,
    })
}

/// Executes a resolved specification.
pub fn execute(spec: &RunSpec) -> AppResult<Outcome> {
    let plain = |table: Table| Outcome {
        table,
        warnings: Vec::new(),
        failure: None,
    };
    match spec.command {
        Command::Cdf => {
            let p = spec.params.build(None)?;
            Ok(plain(compute::cdf_table(&p, &radius_grid(spec, &p)?)?))
        }
        Command::Pdf => {
            let p = spec.params.build(None)?;
            Ok(plain(compute::pdf_table(&p, &radius_grid(spec, &p)?)?))
        }
        Command::Bounds => {
            let p = spec.params.build(None)?;
            let table = compute::bounds_table(&p, &radius_grid(spec, &p)?)?;
            Ok(Outcome {
                table,
                warnings: compute::certification_warnings(p.n()),
                failure: None,
            })
        }
        Command::Simulate => {
            let p = spec.params.build(None)?;
            let grid = radius_grid(spec, &p)?;
            let sim = spec.sim.clone().unwrap_or_default();
            let cfg = SimConfig::new(sim.samples, sim.seed, grid.max(), sim.margin_factor)?;
            let (table, warnings) = compute::simulate_table(&p, &grid, &cfg)?;
            Ok(Outcome {
                table,
                warnings,
                failure: None,
            })
        }
        Command::Deviation => deviation(spec),
        Command::Validate => run_validate(spec),
    }
}

fn write_outcome(spec: &RunSpec, table: &Table) -> AppResult<()> {
    let write = |w: &mut dyn Write| -> AppResult<()> {
        match spec.output.format {
            Format::Csv => table.write_csv(&mut *w),
            Format::Json => table.write_json(&mut *w),
        }
    };
    match spec.output.path.as_deref().filter(|p| *p != Path::new("-")) {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs a resolved specification, writing its artifact.
pub fn run(spec: &RunSpec) -> AppResult<Vec<String>> {
    let outcome = match spec.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AppError::Parameter(format!("thread pool: {e}")))?
            .install(|| execute(spec))?,
        None => execute(spec)?,
    };
    write_outcome(spec, &outcome.table)?;
    match outcome.failure {
        Some(msg) => {
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            Err(AppError::Validation(msg))
        }
        None => Ok(outcome.warnings),
    }
}

/// One-line JSON error record for the diagnostic stream.
pub fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let rendered = e.kind().as_str().unwrap_or("invalid arguments").to_string();
            let detail = e.to_string();
            let first = detail
                .lines()
                .next()
                .unwrap_or(&rendered)
                .trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 1;
        }
    };
    let result = cli.resolve().and_then(|spec| run(&spec));
    match result {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("{w}");
            }
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            e.exit_code()
        }
    }
}
