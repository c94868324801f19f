//! Command-line front end: scenario in, CSV/JSON analysis artifacts out.
//!
//! Exit codes: 0 on success, 1 on scenario or validation errors, 2 when the
//! computation produced no usable result on any grid row.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use satloop_core::analysis::{
    run_heatmap, run_sweep, verdict_limit_cycle, verdict_string_stability, AnalysisError,
    HeatmapOptions, SweepOptions,
};
use satloop_core::balance::{solve_candidates, BalanceProblem};
use satloop_core::io::{
    self, heatmap_csv_layers, heatmap_index_json, limit_cycle_json, locus_csv, sweep_csv,
    sweep_json, verdict_csv, verdict_json, IoError,
};
use satloop_core::model::{log_spaced_grid, Scenario};
use satloop_core::stability::{classify_candidates, open_loop_locus};

#[derive(Parser)]
#[command(
    name = "satloop",
    version,
    about = "Frequency response of a saturated car-following loop: quasi-linear analysis, stability screening, and a simulation cross-check"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for result files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Emit only this format; default emits both CSV and JSON.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct GridArgs {
    /// Override the grid's lowest frequency (Hz).
    #[arg(long)]
    fmin: Option<f64>,
    /// Override the grid's highest frequency (Hz).
    #[arg(long)]
    fmax: Option<f64>,
    /// Override the number of grid points (log-spaced).
    #[arg(long)]
    fpoints: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency response over the scenario grid: quasi-linear, linear, and
    /// optionally the time-domain estimate.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Add the simulation columns (slow).
        #[arg(long)]
        with_sim: bool,
        /// Conservative stability screen over the whole grid.
        #[arg(long)]
        full_sweep: bool,
    },
    /// Magnitude/phase layers over a (frequency, amplitude-ratio) grid.
    Heatmap {
        #[command(flatten)]
        common: CommonArgs,
        /// Lowest grid frequency (Hz).
        #[arg(long, default_value_t = 0.1)]
        fmin: f64,
        /// Highest grid frequency (Hz).
        #[arg(long, default_value_t = 0.5)]
        fmax: f64,
        /// Lowest amplitude ratio (leader amplitude / acceleration bound).
        #[arg(long, default_value_t = 0.0)]
        ratio_min: f64,
        /// Highest amplitude ratio.
        #[arg(long, default_value_t = 8.0)]
        ratio_max: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 40)]
        resolution: usize,
    },
    /// String-stability verdict (max gain vs 1), or the zero-input
    /// limit-cycle diagnostics with --limit-cycle.
    Verdict {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Run the zero-forcing checks instead (balance scan + decay runs).
        #[arg(long)]
        limit_cycle: bool,
        /// Add the simulation column to the gain comparison (slow).
        #[arg(long)]
        with_sim: bool,
        /// Initial position offsets (m) for the decay runs.
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        offsets: Vec<f64>,
        /// Decay-run horizon (s).
        #[arg(long, default_value_t = 120.0)]
        horizon: f64,
    },
    /// Incremental-loop locus of every oscillation candidate at one
    /// frequency, as plot-ready CSV.
    Locus {
        #[command(flatten)]
        common: CommonArgs,
        /// Frequency to solve at (Hz).
        #[arg(long)]
        f: f64,
        /// Conservative stability screen over the whole grid.
        #[arg(long)]
        full_sweep: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Scenario problems exit 1, computation dead-ends exit 2.
            let code = if err.is::<ComputationFailed>() { 2 } else { 1 };
            ExitCode::from(code)
        }
    }
}

/// Marker for "the computation ran but produced nothing usable".
#[derive(Debug)]
struct ComputationFailed(String);

impl std::fmt::Display for ComputationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ComputationFailed {}

fn load(common: &CommonArgs, grid: Option<&GridArgs>) -> anyhow::Result<Scenario> {
    let mut scenario = io::load_scenario(&common.scenario)
        .with_context(|| format!("loading scenario {}", common.scenario.display()))?;
    if let Some(grid) = grid {
        if grid.fmin.is_some() || grid.fmax.is_some() || grid.fpoints.is_some() {
            let fmin = grid.fmin.unwrap_or_else(|| *scenario.freq_grid.first().unwrap());
            let fmax = grid.fmax.unwrap_or_else(|| *scenario.freq_grid.last().unwrap());
            let points = grid.fpoints.unwrap_or(scenario.freq_grid.len().max(2));
            if !(fmin > 0.0 && fmax > fmin && points >= 2) {
                anyhow::bail!("invalid frequency grid override: [{fmin}, {fmax}] x {points}");
            }
            scenario.freq_grid = log_spaced_grid(fmin, fmax, points);
            scenario.validate().context("grid override failed validation")?;
        }
    }
    Ok(scenario)
}

fn ensure_out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
}

fn write(dir: &Path, name: &str, content: &str) -> Result<(), IoError> {
    io::write_text(dir.join(name), content)
}

fn wants(format: Option<Format>, which: Format) -> bool {
    format.is_none_or(|f| f == which)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Sweep { common, grid, with_sim, full_sweep } => {
            let scenario = load(&common, Some(&grid))?;
            let opts = SweepOptions { with_sim, full_sweep };
            let result = match run_sweep(&scenario, &opts) {
                Ok(r) => r,
                Err(AnalysisError::Model(e)) => return Err(e.into()),
                Err(e) => return Err(e.into()),
            };
            ensure_out_dir(&common.out)?;
            if wants(common.format, Format::Csv) {
                write(&common.out, "sweep.csv", &sweep_csv(&result))?;
            }
            if wants(common.format, Format::Json) {
                write(&common.out, "sweep.json", &sweep_json(&scenario, &result, "sweep"))?;
            }
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            let n_ok = result.rows.iter().filter(|r| r.mag_idf.is_some()).count();
            println!("sweep: {} of {} grid rows solved -> {}", n_ok, result.rows.len(), common.out.display());
            if result.all_rows_failed() {
                return Err(ComputationFailed("no grid row produced a response".into()).into());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Heatmap { common, fmin, fmax, ratio_min, ratio_max, resolution } => {
            let scenario = load(&common, None)?;
            let opts = HeatmapOptions {
                f_min: fmin,
                f_max: fmax,
                ratio_min,
                ratio_max,
                f_points: resolution,
                ratio_points: resolution,
            };
            let result = run_heatmap(&scenario, &opts)?;
            ensure_out_dir(&common.out)?;
            if wants(common.format, Format::Csv) {
                for (name, content) in heatmap_csv_layers(&result) {
                    write(&common.out, &name, &content)?;
                }
            }
            if wants(common.format, Format::Json) {
                write(&common.out, "heatmap_index.json", &heatmap_index_json(&scenario, &result))?;
            }
            let n = result.mag_idf.len();
            let failed = result.warnings.len();
            println!("heatmap: {}x{} grid, {failed} of {n} cells failed -> {}",
                result.ratio.len(), result.f_hz.len(), common.out.display());
            if failed == n {
                return Err(ComputationFailed("every heatmap cell failed".into()).into());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verdict { common, grid, limit_cycle, with_sim, offsets, horizon } => {
            let scenario = load(&common, Some(&grid))?;
            ensure_out_dir(&common.out)?;
            if limit_cycle {
                let verdict = verdict_limit_cycle(&scenario, &offsets, horizon)?;
                if wants(common.format, Format::Json) || common.format.is_none() {
                    write(&common.out, "limit_cycle.json", &limit_cycle_json(&scenario, &verdict))?;
                }
                let min_d = verdict
                    .balance
                    .iter()
                    .map(|b| b.min_denominator)
                    .fold(f64::INFINITY, f64::min);
                println!(
                    "limit-cycle check: balance {} (min |D| = {:.3e}), decay {}",
                    if verdict.balance.iter().all(|b| b.passed()) { "clean" } else { "VIOLATED" },
                    min_d,
                    if verdict.decay.iter().all(|d| d.passed) { "passed" } else { "FAILED" },
                );
                return Ok(ExitCode::SUCCESS);
            }
            let report =
                verdict_string_stability(&scenario, &SweepOptions { with_sim, full_sweep: false })?;
            if wants(common.format, Format::Csv) {
                write(&common.out, "verdict.csv", &verdict_csv(&report))?;
            }
            if wants(common.format, Format::Json) {
                write(&common.out, "verdict.json", &verdict_json(&scenario, &report))?;
            }
            let lin = &report.linear;
            println!(
                "linear: max |F| = {:.6} at {:.4} Hz -> {}",
                lin.max_magnitude,
                lin.argmax_f_hz,
                if lin.string_stable { "string stable" } else { "string UNSTABLE" }
            );
            match &report.idf {
                Some(v) => println!(
                    "quasi-linear: max |F| = {:.6} at {:.4} Hz -> {}",
                    v.max_magnitude,
                    v.argmax_f_hz,
                    if v.string_stable { "string stable" } else { "string UNSTABLE" }
                ),
                None => println!("quasi-linear: no usable grid row"),
            }
            if let Some(v) = &report.simulation {
                println!(
                    "simulation: max |F| = {:.6} at {:.4} Hz -> {}",
                    v.max_magnitude,
                    v.argmax_f_hz,
                    if v.string_stable { "string stable" } else { "string UNSTABLE" }
                );
            }
            println!(
                "limits reached on grid: acceleration {}, speed {}",
                report.accel_limit_reached, report.speed_limit_reached
            );
            if report.idf.is_none() {
                return Err(ComputationFailed("no grid row produced a response".into()).into());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Locus { common, f, full_sweep } => {
            let scenario = load(&common, None)?;
            if f.is_nan() || f <= 0.0 {
                anyhow::bail!("--f must be a positive frequency in Hz");
            }
            let omega = TAU * f;
            let problem = BalanceProblem::new(
                scenario.gains,
                scenario.limits,
                scenario.leader_amplitude,
                omega,
            )?;
            let mut candidates = solve_candidates(&problem, &scenario.solver)?;
            if candidates.is_empty() {
                return Err(ComputationFailed(format!("no oscillation candidate at {f} Hz")).into());
            }
            let grid = full_sweep.then(|| scenario.omega_grid());
            classify_candidates(
                &mut candidates,
                &scenario.gains,
                &scenario.limits,
                &scenario.solver,
                grid.as_deref(),
            );
            ensure_out_dir(&common.out)?;
            for (i, candidate) in candidates.iter().enumerate() {
                let locus = open_loop_locus(
                    candidate,
                    &scenario.gains,
                    &scenario.limits,
                    scenario.solver.theta_samples,
                )?;
                let name = format!("locus_c{i}.csv");
                write(&common.out, &name, &locus_csv(&locus))?;
                println!(
                    "candidate {i}: B = {:.6e}, phase = {:+.6}, {} -> {}",
                    candidate.amplitude,
                    candidate.phase,
                    candidate.stability,
                    common.out.join(&name).display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
