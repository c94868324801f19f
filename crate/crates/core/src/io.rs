//! Scenario files and result emission.
//!
//! Scenarios are single JSON documents; loading resolves defaults and
//! validates every field. Result files are UTF-8 CSV with LF line endings
//! and fixed column orders, plus a JSON mirror carrying full metadata.
//! Floats are printed with nine significant digits so identical inputs
//! yield byte-identical files.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;
use thiserror::Error;

use crate::analysis::{HeatmapResult, LimitCycleVerdict, MethodVerdict, SweepResult, VerdictReport};
use crate::model::{
    linear_grid, log_spaced_grid, ControllerGains, ModelError, SaturationLimits, Scenario,
    SolverSettings, DEFAULT_FREQ_CEIL_HZ, DEFAULT_FREQ_FLOOR_HZ, DEFAULT_FREQ_POINTS,
};
use crate::simulate::SimTrajectory;
use crate::stability::LocusPoint;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("failed to parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Validation(#[from] ModelError),
    #[error("scenario field {field}: {rule}")]
    Field { field: &'static str, rule: String },
}

/// Controller block of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub k_d: f64,
    pub k_v: f64,
    pub tau: f64,
}

/// One pair of saturation bounds.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub min: f64,
    pub max: f64,
}

/// Absolute speed window plus the equilibrium speed it is measured against.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpeedSpec {
    pub min: f64,
    pub max: f64,
    pub equilibrium: f64,
}

/// Saturation block; omitted elements are inactive (infinite bounds).
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accel: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<SpeedSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Log,
    Linear,
}

/// Frequency range used when no explicit grid is given.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FreqRangeSpec {
    pub min_hz: f64,
    pub max_hz: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: GridSpacing,
}

fn default_points() -> usize {
    DEFAULT_FREQ_POINTS
}

fn default_spacing() -> GridSpacing {
    GridSpacing::Log
}

/// Solver block; every field optional, defaults recorded on save.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_ini_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle_periods: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_periods: Option<usize>,
}

/// On-disk scenario document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub controller: ControllerSpec,
    #[serde(default)]
    pub limits: LimitsSpec,
    pub leader_amplitude: f64,
    #[serde(default)]
    pub standstill_distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_range: Option<FreqRangeSpec>,
    #[serde(default = "default_floor")]
    pub freq_floor_hz: f64,
    #[serde(default)]
    pub solver: SolverSpec,
}

fn default_floor() -> f64 {
    DEFAULT_FREQ_FLOOR_HZ
}

impl ScenarioFile {
    /// Resolves defaults and builds the validated scenario. Grid precedence:
    /// explicit `freq_grid`, then `freq_range`, then the default band.
    pub fn resolve(&self) -> Result<Scenario, IoError> {
        let gains =
            ControllerGains::derive(self.controller.k_d, self.controller.k_v, self.controller.tau)?;
        let limits = SaturationLimits::new(
            self.limits.accel.as_ref().map(|b| (b.min, b.max)),
            self.limits.speed.as_ref().map(|s| (s.min, s.max, s.equilibrium)),
        )?;
        let freq_grid = match (&self.freq_grid, &self.freq_range) {
            (Some(grid), _) => grid.clone(),
            (None, Some(range)) => {
                if !(range.min_hz > 0.0 && range.max_hz > range.min_hz) {
                    return Err(IoError::Field {
                        field: "freq_range",
                        rule: format!(
                            "requires 0 < min_hz < max_hz, got [{}, {}]",
                            range.min_hz, range.max_hz
                        ),
                    });
                }
                if range.points < 2 {
                    return Err(IoError::Field {
                        field: "freq_range.points",
                        rule: format!("requires at least 2 points, got {}", range.points),
                    });
                }
                match range.spacing {
                    GridSpacing::Log => log_spaced_grid(range.min_hz, range.max_hz, range.points),
                    GridSpacing::Linear => linear_grid(range.min_hz, range.max_hz, range.points),
                }
            }
            (None, None) => {
                log_spaced_grid(DEFAULT_FREQ_FLOOR_HZ, DEFAULT_FREQ_CEIL_HZ, DEFAULT_FREQ_POINTS)
            }
        };
        let d = SolverSettings::default();
        let solver = SolverSettings {
            b_ini_max: self.solver.b_ini_max,
            sweep_points: self.solver.sweep_points.unwrap_or(d.sweep_points),
            root_tol: self.solver.root_tol.unwrap_or(d.root_tol),
            theta_samples: self.solver.theta_samples.unwrap_or(d.theta_samples),
            dt: self.solver.dt.unwrap_or(d.dt),
            settle_periods: self.solver.settle_periods.unwrap_or(d.settle_periods),
            measure_periods: self.solver.measure_periods.unwrap_or(d.measure_periods),
        };
        let scenario = Scenario {
            gains,
            limits,
            leader_amplitude: self.leader_amplitude,
            freq_grid,
            solver,
            standstill_distance: self.standstill_distance,
            freq_floor_hz: self.freq_floor_hz,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

/// Fully resolved file document for a scenario: the grid is explicit and
/// every solver field recorded, so a reload reproduces the scenario
/// field-for-field.
pub fn to_scenario_file(scenario: &Scenario) -> ScenarioFile {
    let limits = &scenario.limits;
    ScenarioFile {
        controller: ControllerSpec {
            k_d: scenario.gains.k_d,
            k_v: scenario.gains.k_v,
            tau: scenario.gains.tau,
        },
        limits: LimitsSpec {
            accel: limits
                .accel_active
                .then_some(BoundsSpec { min: limits.a_min, max: limits.a_max }),
            speed: limits.speed_active.then_some(SpeedSpec {
                min: limits.v_min,
                max: limits.v_max,
                equilibrium: limits.v_e,
            }),
        },
        leader_amplitude: scenario.leader_amplitude,
        standstill_distance: scenario.standstill_distance,
        freq_grid: Some(scenario.freq_grid.clone()),
        freq_range: None,
        freq_floor_hz: scenario.freq_floor_hz,
        solver: SolverSpec {
            b_ini_max: scenario.solver.b_ini_max,
            sweep_points: Some(scenario.solver.sweep_points),
            root_tol: Some(scenario.solver.root_tol),
            theta_samples: Some(scenario.solver.theta_samples),
            dt: Some(scenario.solver.dt),
            settle_periods: Some(scenario.solver.settle_periods),
            measure_periods: Some(scenario.solver.measure_periods),
        },
    }
}

/// Loads, resolves, and validates a scenario document.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|source| IoError::Parse { path: path.display().to_string(), source })?;
    file.resolve()
}

/// Writes the resolved scenario document.
pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<(), IoError> {
    let file = to_scenario_file(scenario);
    let text = serde_json::to_string_pretty(&file).expect("scenario serialization is infallible");
    write_text(path, &(text + "\n"))
}

/// Writes UTF-8 text, reporting the path on failure.
pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, text)
        .map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

/// Nine-significant-digit float formatting; the CSV determinism contract.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.8e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn fmt_bool_opt(b: Option<bool>) -> String {
    b.map(|b| b.to_string()).unwrap_or_default()
}

/// Frozen sweep CSV header.
pub const SWEEP_CSV_HEADER: &str =
    "f_hz,mag_idf,phase_idf_rad,phase_idf_unwrapped,mag_lin,phase_lin_rad,mag_sim,phase_sim_rad,B,stable,warnings";

/// Sweep result as CSV, one row per grid frequency.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        let warnings = row.warnings.join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(row.f_hz),
            fmt_opt(row.mag_idf),
            fmt_opt(row.phase_idf),
            fmt_opt(row.phase_idf_unwrapped),
            fmt_sig(row.mag_lin),
            fmt_sig(row.phase_lin),
            fmt_opt(row.mag_sim),
            fmt_opt(row.phase_sim),
            fmt_opt(row.candidate_b),
            fmt_bool_opt(row.stable),
            warnings,
        ));
    }
    out
}

fn deg(rad: f64) -> f64 {
    rad.to_degrees()
}

fn tool_meta(command: &str) -> serde_json::Value {
    json!({
        "name": "satloop",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
    })
}

fn scenario_echo(scenario: &Scenario) -> serde_json::Value {
    serde_json::to_value(to_scenario_file(scenario)).expect("scenario echo is serializable")
}

/// JSON mirror of a sweep: scenario echo, settings, warnings, and rows with
/// both radian and degree phases.
pub fn sweep_json(scenario: &Scenario, result: &SweepResult, command: &str) -> String {
    let rows: Vec<serde_json::Value> = result
        .rows
        .iter()
        .map(|r| {
            json!({
                "f_hz": r.f_hz,
                "omega": r.omega,
                "mag_idf": r.mag_idf,
                "phase_idf_rad": r.phase_idf,
                "phase_idf_deg": r.phase_idf.map(deg),
                "phase_idf_unwrapped": r.phase_idf_unwrapped,
                "mag_lin": r.mag_lin,
                "phase_lin_rad": r.phase_lin,
                "phase_lin_deg": deg(r.phase_lin),
                "phase_lin_unwrapped": r.phase_lin_unwrapped,
                "mag_sim": r.mag_sim,
                "phase_sim_rad": r.phase_sim,
                "phase_sim_deg": r.phase_sim.map(deg),
                "candidate_b": r.candidate_b,
                "stable": r.stable,
                "limits_reached": r.limits_reached,
                "accel_reached": r.accel_reached,
                "speed_reached": r.speed_reached,
                "warnings": r.warnings,
            })
        })
        .collect();
    let doc = json!({
        "tool": tool_meta(command),
        "scenario": scenario_echo(scenario),
        "warnings": result.warnings,
        "rows": rows,
    });
    serde_json::to_string_pretty(&doc).expect("sweep mirror is serializable") + "\n"
}

/// Heatmap layer names in emission order.
pub const HEATMAP_LAYERS: [&str; 7] = [
    "mag_lin",
    "phase_lin",
    "mag_idf",
    "phase_idf",
    "diff_mag",
    "diff_phase",
    "limits_reached",
];

fn heatmap_layer_csv(result: &HeatmapResult, layer: &str) -> String {
    let nf = result.f_hz.len();
    let mut out = String::from("ratio");
    for f in &result.f_hz {
        out.push(',');
        out.push_str(&fmt_sig(*f));
    }
    out.push('\n');
    for (i, ratio) in result.ratio.iter().enumerate() {
        out.push_str(&fmt_sig(*ratio));
        for j in 0..nf {
            let k = i * nf + j;
            out.push(',');
            match layer {
                "mag_lin" => out.push_str(&fmt_sig(result.mag_lin[k])),
                "phase_lin" => out.push_str(&fmt_sig(result.phase_lin[k])),
                "mag_idf" => out.push_str(&fmt_sig(result.mag_idf[k])),
                "phase_idf" => out.push_str(&fmt_sig(result.phase_idf[k])),
                "diff_mag" => out.push_str(&fmt_sig(result.diff_mag[k])),
                "diff_phase" => out.push_str(&fmt_sig(result.diff_phase[k])),
                "limits_reached" => out.push_str(if result.limits_reached[k] { "true" } else { "false" }),
                _ => unreachable!("unknown layer {layer}"),
            }
        }
        out.push('\n');
    }
    out
}

/// One CSV per heatmap layer, `(file name, content)` pairs.
pub fn heatmap_csv_layers(result: &HeatmapResult) -> Vec<(String, String)> {
    HEATMAP_LAYERS
        .iter()
        .map(|layer| (format!("heatmap_{layer}.csv"), heatmap_layer_csv(result, layer)))
        .collect()
}

/// Index document tying the heatmap layers together.
pub fn heatmap_index_json(scenario: &Scenario, result: &HeatmapResult) -> String {
    let warnings: Vec<serde_json::Value> = result
        .warnings
        .iter()
        .map(|w| {
            json!({
                "ratio_index": w.ratio_index,
                "f_index": w.f_index,
                "message": w.message,
            })
        })
        .collect();
    let doc = json!({
        "tool": tool_meta("heatmap"),
        "scenario": scenario_echo(scenario),
        "f_hz": result.f_hz,
        "ratio": result.ratio,
        "layers": HEATMAP_LAYERS.iter()
            .map(|l| (l.to_string(), format!("heatmap_{l}.csv")))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "warnings": warnings,
    });
    serde_json::to_string_pretty(&doc).expect("heatmap index is serializable") + "\n"
}

/// Locus CSV: `theta, re, im`, closing on its first point.
pub fn locus_csv(points: &[LocusPoint]) -> String {
    let mut out = String::from("theta,re,im\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(p.theta),
            fmt_sig(p.value.re),
            fmt_sig(p.value.im)
        ));
    }
    out
}

fn method_verdict_json(v: &MethodVerdict) -> serde_json::Value {
    json!({
        "max_magnitude": v.max_magnitude,
        "argmax_f_hz": v.argmax_f_hz,
        "string_stable": v.string_stable,
    })
}

/// Verdict JSON report.
pub fn verdict_json(scenario: &Scenario, report: &VerdictReport) -> String {
    let doc = json!({
        "tool": tool_meta("verdict"),
        "scenario": scenario_echo(scenario),
        "linear": method_verdict_json(&report.linear),
        "idf": report.idf.as_ref().map(method_verdict_json),
        "simulation": report.simulation.as_ref().map(method_verdict_json),
        "linear_crossing_f_hz": report.linear_crossing_f_hz,
        "accel_limit_reached": report.accel_limit_reached,
        "speed_limit_reached": report.speed_limit_reached,
        "warnings": report.rows.warnings,
        "row_warnings": report.rows.rows.iter()
            .filter(|r| !r.warnings.is_empty())
            .map(|r| json!({"f_hz": r.f_hz, "warnings": r.warnings}))
            .collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("verdict is serializable") + "\n"
}

/// Verdict CSV: one row per method.
pub fn verdict_csv(report: &VerdictReport) -> String {
    let mut out = String::from("method,max_mag,argmax_f_hz,stable\n");
    let mut push = |name: &str, v: &MethodVerdict| {
        out.push_str(&format!(
            "{},{},{},{}\n",
            name,
            fmt_sig(v.max_magnitude),
            fmt_sig(v.argmax_f_hz),
            v.string_stable
        ));
    };
    push("linear", &report.linear);
    if let Some(v) = &report.idf {
        push("idf", v);
    }
    if let Some(v) = &report.simulation {
        push("simulation", v);
    }
    out
}

/// Limit-cycle verdict JSON report.
pub fn limit_cycle_json(scenario: &Scenario, verdict: &LimitCycleVerdict) -> String {
    let balance: Vec<serde_json::Value> = verdict
        .balance
        .iter()
        .map(|b| {
            json!({
                "omega": b.omega,
                "f_hz": b.omega / std::f64::consts::TAU,
                "b_max": b.b_max,
                "min_denominator": b.min_denominator,
                "roots": b.roots,
                "passed": b.passed(),
            })
        })
        .collect();
    let decay: Vec<serde_json::Value> = verdict
        .decay
        .iter()
        .map(|d| {
            json!({
                "initial_offset": d.initial_offset,
                "horizon": d.horizon,
                "max_tail": d.max_tail,
                "threshold": d.threshold,
                "passed": d.passed,
            })
        })
        .collect();
    let doc = json!({
        "tool": tool_meta("verdict --limit-cycle"),
        "scenario": scenario_echo(scenario),
        "balance": balance,
        "decay": decay,
        "passed": verdict.passed,
    });
    serde_json::to_string_pretty(&doc).expect("limit-cycle verdict is serializable") + "\n"
}

/// Trajectory dump CSV: `t, leader, follower, velocity, acceleration`.
pub fn trajectory_csv(traj: &SimTrajectory) -> String {
    let mut out = String::from("t,leader,follower,velocity,acceleration\n");
    for i in 0..traj.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(traj.t[i]),
            fmt_sig(traj.leader[i]),
            fmt_sig(traj.follower[i]),
            fmt_sig(traj.velocity[i]),
            fmt_sig(traj.accel_applied[i])
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{run_sweep, SweepOptions};
    use crate::model::log_spaced_grid;

    fn scenario_61() -> Scenario {
        Scenario {
            gains: ControllerGains::derive(1.0, 2.0, 1.0).unwrap(),
            limits: SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap(),
            leader_amplitude: 7.0,
            freq_grid: log_spaced_grid(0.02, 0.5, 5),
            solver: SolverSettings::default(),
            standstill_distance: 2.0,
            freq_floor_hz: DEFAULT_FREQ_FLOOR_HZ,
        }
    }

    #[test]
    fn scenario_file_round_trip_is_exact() {
        let scenario = scenario_61();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        save_scenario(&scenario, &path).unwrap();
        let reloaded = load_scenario(&path).unwrap();
        assert_eq!(scenario, reloaded);
    }

    #[test]
    fn default_scenario_resolves_known_values() {
        let text = r#"{
            "controller": {"k_d": 1.0, "k_v": 2.0, "tau": 1.0},
            "limits": {
                "accel": {"min": -5.0, "max": 5.0},
                "speed": {"min": 0.0, "max": 20.0, "equilibrium": 10.0}
            },
            "leader_amplitude": 7.0
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        let s = file.resolve().unwrap();
        assert_eq!((s.gains.k1, s.gains.k2, s.gains.k3), (1.0, 2.0, -3.0));
        assert_eq!((s.limits.vt_min, s.limits.vt_max), (-10.0, 10.0));
        assert_eq!(s.freq_grid.len(), DEFAULT_FREQ_POINTS);
        assert!((s.freq_grid[0] - DEFAULT_FREQ_FLOOR_HZ).abs() < 1e-12);
    }

    #[test]
    fn truck_scenario_resolves_gains() {
        let text = r#"{
            "controller": {"k_d": 1.0, "k_v": 0.4, "tau": 0.4},
            "limits": {"accel": {"min": -1.0, "max": 1.0}},
            "leader_amplitude": 189.98,
            "freq_range": {"min_hz": 0.02, "max_hz": 0.5, "points": 25}
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        let s = file.resolve().unwrap();
        assert_eq!((s.gains.k1, s.gains.k2), (1.0, 0.4));
        assert!((s.gains.k3 + 0.8).abs() < 1e-15);
        assert_eq!(s.freq_grid.len(), 25);
        assert_eq!(s.loop_config(), crate::model::LoopConfig::ControlOnly);
    }

    #[test]
    fn missing_field_is_named_in_the_error() {
        let text = r#"{
            "controller": {"k_d": 1.0, "tau": 1.0},
            "leader_amplitude": 1.0
        }"#;
        let err = serde_json::from_str::<ScenarioFile>(text).unwrap_err();
        assert!(err.to_string().contains("k_v"), "error was: {err}");
    }

    #[test]
    fn sweep_csv_header_is_frozen() {
        assert_eq!(
            SWEEP_CSV_HEADER,
            "f_hz,mag_idf,phase_idf_rad,phase_idf_unwrapped,mag_lin,phase_lin_rad,mag_sim,phase_sim_rad,B,stable,warnings"
        );
        let s = scenario_61();
        let result = run_sweep(&s, &SweepOptions::default()).unwrap();
        let csv = sweep_csv(&result);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
        assert_eq!(lines.count(), s.freq_grid.len());
        assert!(!csv.contains("\r\n"));
    }

    #[test]
    fn csv_emission_is_deterministic() {
        let s = scenario_61();
        let a = sweep_csv(&run_sweep(&s, &SweepOptions::default()).unwrap());
        let b = sweep_csv(&run_sweep(&s, &SweepOptions::default()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn float_formatting_has_nine_significant_digits() {
        assert_eq!(fmt_sig(0.8114), "8.11400000e-1");
        assert_eq!(fmt_sig(-3.0), "-3.00000000e0");
        assert_eq!(fmt_sig(189.98), "1.89980000e2");
        assert_eq!(fmt_sig(f64::NAN), "NaN");
    }

    #[test]
    fn sweep_json_mirrors_rows_with_degrees() {
        let s = scenario_61();
        let result = run_sweep(&s, &SweepOptions::default()).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&sweep_json(&s, &result, "sweep")).unwrap();
        assert_eq!(doc["tool"]["name"], "satloop");
        let rows = doc["rows"].as_array().unwrap();
        assert_eq!(rows.len(), result.rows.len());
        let r0 = &rows[0];
        let rad = r0["phase_lin_rad"].as_f64().unwrap();
        let deg = r0["phase_lin_deg"].as_f64().unwrap();
        assert!((deg - rad.to_degrees()).abs() < 1e-12);
        // Scenario echo reloads to the same scenario.
        let echo: ScenarioFile = serde_json::from_value(doc["scenario"].clone()).unwrap();
        assert_eq!(echo.resolve().unwrap(), s);
    }

    #[test]
    fn trajectory_csv_has_contract_header() {
        let traj = SimTrajectory {
            dt: 0.5,
            t: vec![0.0, 0.5],
            leader: vec![0.0, 1.0],
            follower: vec![0.0, 0.5],
            velocity: vec![0.0, 0.1],
            accel_applied: vec![0.2, 0.3],
            steps_per_period: None,
        };
        let csv = trajectory_csv(&traj);
        assert!(csv.starts_with("t,leader,follower,velocity,acceleration\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
