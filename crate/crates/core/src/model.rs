//! Domain types for the saturated car-following loop.
//!
//! A follower vehicle tracks its leader with the linear feedback law
//! `a = k1 (p_lead - p) + k2 v_lead + k3 v`, expressed in oscillatory
//! coordinates (deviations from the constant-speed equilibrium motion).
//! Two hard saturations act on the loop: the commanded acceleration is
//! clipped to `[a_min, a_max]` and the integrated velocity state is clipped
//! to the oscillatory speed window `[vt_min, vt_max]` derived from the
//! absolute speed limits and the equilibrium speed.
//!
//! Everything here is immutable after construction and safe to share across
//! worker threads.

use thiserror::Error;

/// Lowest admissible grid frequency (Hz). The loop response diverges like
/// `1/omega^2`, so zero is excluded.
pub const DEFAULT_FREQ_FLOOR_HZ: f64 = 0.002;

/// Default upper edge of the analysis band (Hz).
pub const DEFAULT_FREQ_CEIL_HZ: f64 = 0.5;

/// Default number of grid points when a scenario gives only a range.
pub const DEFAULT_FREQ_POINTS: usize = 50;

/// Validation failure for a domain type or scenario field.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("spacing gain k_d must be positive, got {0}")]
    NonPositiveKd(f64),
    #[error("speed-difference gain k_v must be positive, got {0}")]
    NonPositiveKv(f64),
    #[error("time gap tau must be non-negative and finite, got {0}")]
    InvalidTau(f64),
    #[error("acceleration bounds must satisfy a_min < 0 < a_max, got [{lo}, {hi}]")]
    InvalidAccelBounds { lo: f64, hi: f64 },
    #[error("speed bounds must satisfy v_min < v_max, got [{lo}, {hi}]")]
    InvalidSpeedBounds { lo: f64, hi: f64 },
    #[error("equilibrium speed {v_e} outside speed bounds [{lo}, {hi}]")]
    EquilibriumOutsideBounds { v_e: f64, lo: f64, hi: f64 },
    #[error("leader amplitude must be non-negative and finite, got {0}")]
    InvalidAmplitude(f64),
    #[error("frequency grid must be non-empty")]
    EmptyFrequencyGrid,
    #[error("frequency grid must be strictly increasing at index {index}: {prev} >= {next}")]
    NonIncreasingGrid { index: usize, prev: f64, next: f64 },
    #[error("grid frequency {f} Hz below the floor of {floor} Hz")]
    FrequencyBelowFloor { f: f64, floor: f64 },
    #[error("solver setting {name} must be positive, got {value}")]
    NonPositiveSetting { name: &'static str, value: f64 },
    #[error("solver sweep_points must be >= 50, got {0}")]
    TooFewSweepPoints(usize),
    #[error("solver theta_samples must be >= 128, got {0}")]
    TooFewThetaSamples(usize),
    #[error("standstill distance must be non-negative and finite, got {0}")]
    InvalidStandstill(f64),
}

/// Feedback gains of the spacing controller together with the equivalent
/// loop gains used by every downstream computation.
///
/// `k1 = k_d`, `k2 = k_v`, `k3 = -k_v - k_d tau`; the admissible ranges of
/// the raw gains force `k1 > 0`, `k2 > 0`, `k3 < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    /// Spacing-deviation gain [1/s^2].
    pub k_d: f64,
    /// Speed-difference gain [1/s].
    pub k_v: f64,
    /// Spacing-policy time gap (s); zero for a constant-distance policy.
    pub tau: f64,
    /// Loop gain on the leader/follower position difference [1/s^2].
    pub k1: f64,
    /// Loop gain on the leader velocity [1/s].
    pub k2: f64,
    /// Loop gain on the follower (saturated) velocity [1/s]; always negative.
    pub k3: f64,
}

impl ControllerGains {
    /// Builds the gain set from the raw controller parameters.
    pub fn derive(k_d: f64, k_v: f64, tau: f64) -> Result<Self, ModelError> {
        if k_d.is_nan() || k_d <= 0.0 || !k_d.is_finite() {
            return Err(ModelError::NonPositiveKd(k_d));
        }
        if k_v.is_nan() || k_v <= 0.0 || !k_v.is_finite() {
            return Err(ModelError::NonPositiveKv(k_v));
        }
        if tau.is_nan() || tau < 0.0 || !tau.is_finite() {
            return Err(ModelError::InvalidTau(tau));
        }
        Ok(Self {
            k_d,
            k_v,
            tau,
            k1: k_d,
            k2: k_v,
            k3: -k_v - k_d * tau,
        })
    }
}

/// Saturation bounds of the loop, in oscillatory coordinates.
///
/// Inactive saturations carry infinite bounds so that downstream code has a
/// single code path; the describing function of an infinite-bound element is
/// exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationLimits {
    /// Lower acceleration bound (m/s^2), `-inf` when inactive.
    pub a_min: f64,
    /// Upper acceleration bound (m/s^2), `+inf` when inactive.
    pub a_max: f64,
    /// Absolute speed floor (m/s), `-inf` when inactive.
    pub v_min: f64,
    /// Absolute speed ceiling (m/s), `+inf` when inactive.
    pub v_max: f64,
    /// Equilibrium speed (m/s); meaningful only when the speed saturation is active.
    pub v_e: f64,
    /// Oscillatory speed floor `v_min - v_e` (m/s).
    pub vt_min: f64,
    /// Oscillatory speed ceiling `v_max - v_e` (m/s).
    pub vt_max: f64,
    /// Whether the acceleration saturation is active.
    pub accel_active: bool,
    /// Whether the speed saturation is active.
    pub speed_active: bool,
}

/// Shifts absolute speed bounds into the oscillatory coordinate frame.
pub fn derive_oscillatory_limits(
    v_min: f64,
    v_max: f64,
    v_e: f64,
) -> Result<(f64, f64), ModelError> {
    if v_min.is_nan() || v_max.is_nan() || v_min >= v_max {
        return Err(ModelError::InvalidSpeedBounds { lo: v_min, hi: v_max });
    }
    if v_e.is_nan() || v_e < v_min || v_e > v_max {
        return Err(ModelError::EquilibriumOutsideBounds { v_e, lo: v_min, hi: v_max });
    }
    Ok((v_min - v_e, v_max - v_e))
}

impl SaturationLimits {
    /// Builds the limit set. `accel` gives `(a_min, a_max)`; `speed` gives
    /// `(v_min, v_max, v_e)`. `None` leaves the corresponding saturation
    /// inactive (infinite bounds).
    pub fn new(
        accel: Option<(f64, f64)>,
        speed: Option<(f64, f64, f64)>,
    ) -> Result<Self, ModelError> {
        let (a_min, a_max, accel_active) = match accel {
            Some((lo, hi)) => {
                if !(lo < 0.0 && hi > 0.0) || !lo.is_finite() || !hi.is_finite() {
                    return Err(ModelError::InvalidAccelBounds { lo, hi });
                }
                (lo, hi, true)
            }
            None => (f64::NEG_INFINITY, f64::INFINITY, false),
        };
        let (v_min, v_max, v_e, vt_min, vt_max, speed_active) = match speed {
            Some((lo, hi, v_e)) => {
                if !lo.is_finite() || !hi.is_finite() || !v_e.is_finite() {
                    return Err(ModelError::InvalidSpeedBounds { lo, hi });
                }
                let (vt_min, vt_max) = derive_oscillatory_limits(lo, hi, v_e)?;
                (lo, hi, v_e, vt_min, vt_max, true)
            }
            None => (
                f64::NEG_INFINITY,
                f64::INFINITY,
                0.0,
                f64::NEG_INFINITY,
                f64::INFINITY,
                false,
            ),
        };
        Ok(Self {
            a_min,
            a_max,
            v_min,
            v_max,
            v_e,
            vt_min,
            vt_max,
            accel_active,
            speed_active,
        })
    }

    /// Limits with both saturations disabled (a purely linear loop).
    pub fn unbounded() -> Self {
        Self::new(None, None).expect("unbounded limits are always valid")
    }

    /// True when every active saturation has symmetric bounds.
    pub fn is_symmetric(&self) -> bool {
        let accel_ok = !self.accel_active || rel_close(-self.a_min, self.a_max);
        let speed_ok = !self.speed_active || rel_close(-self.vt_min, self.vt_max);
        accel_ok && speed_ok
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Which saturations participate in the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopConfig {
    /// Only the acceleration saturation is active.
    ControlOnly,
    /// Only the velocity saturation is active.
    StateOnly,
    /// Both saturations are active.
    Both,
    /// No saturation; the loop is linear.
    Linear,
}

impl std::fmt::Display for LoopConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            LoopConfig::ControlOnly => "control-only",
            LoopConfig::StateOnly => "state-only",
            LoopConfig::Both => "both",
            LoopConfig::Linear => "linear",
        };
        f.write_str(name)
    }
}

/// Derives the loop configuration from the saturation activity flags.
pub fn classify_loop(limits: &SaturationLimits) -> LoopConfig {
    match (limits.accel_active, limits.speed_active) {
        (true, true) => LoopConfig::Both,
        (true, false) => LoopConfig::ControlOnly,
        (false, true) => LoopConfig::StateOnly,
        (false, false) => LoopConfig::Linear,
    }
}

/// Numerical settings shared by the balance solver, the stability test, and
/// the time-domain integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Ceiling of the amplitude sweep; `None` selects an automatic ceiling
    /// from the linear response and the saturation scales.
    pub b_ini_max: Option<f64>,
    /// Number of points in the amplitude scan.
    pub sweep_points: usize,
    /// Relative tolerance of the bracketed root refinement.
    pub root_tol: f64,
    /// Number of locus samples for the stability test.
    pub theta_samples: usize,
    /// Requested integrator step (s); refined per frequency so that a period
    /// is an exact number of steps.
    pub dt: f64,
    /// Periods discarded before steady-state measurement.
    pub settle_periods: usize,
    /// Periods used for the steady-state harmonic fit.
    pub measure_periods: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            b_ini_max: None,
            sweep_points: 200,
            root_tol: 1e-10,
            theta_samples: 720,
            dt: 1e-3,
            settle_periods: 15,
            measure_periods: 5,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(b) = self.b_ini_max {
            if b.is_nan() || b <= 0.0 || !b.is_finite() {
                return Err(ModelError::NonPositiveSetting { name: "b_ini_max", value: b });
            }
        }
        if self.sweep_points < 50 {
            return Err(ModelError::TooFewSweepPoints(self.sweep_points));
        }
        if self.root_tol.is_nan() || self.root_tol <= 0.0 {
            return Err(ModelError::NonPositiveSetting { name: "root_tol", value: self.root_tol });
        }
        if self.theta_samples < 128 {
            return Err(ModelError::TooFewThetaSamples(self.theta_samples));
        }
        if self.dt.is_nan() || self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(ModelError::NonPositiveSetting { name: "dt", value: self.dt });
        }
        if self.settle_periods == 0 {
            return Err(ModelError::NonPositiveSetting {
                name: "settle_periods",
                value: self.settle_periods as f64,
            });
        }
        if self.measure_periods == 0 {
            return Err(ModelError::NonPositiveSetting {
                name: "measure_periods",
                value: self.measure_periods as f64,
            });
        }
        Ok(())
    }
}

/// Non-fatal condition recorded during scenario validation.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    /// Acceleration bounds are not symmetric; the quasi-linear gain is most
    /// accurate for symmetric clipping.
    AsymmetricAccelBounds { a_min: f64, a_max: f64 },
    /// Oscillatory speed bounds are not symmetric about zero.
    AsymmetricSpeedBounds { vt_min: f64, vt_max: f64 },
}

impl std::fmt::Display for ScenarioWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScenarioWarning::AsymmetricAccelBounds { a_min, a_max } => write!(
                f,
                "asymmetric acceleration bounds [{a_min}, {a_max}]; quasi-linear gains are most accurate for symmetric limits"
            ),
            ScenarioWarning::AsymmetricSpeedBounds { vt_min, vt_max } => write!(
                f,
                "asymmetric oscillatory speed bounds [{vt_min}, {vt_max}]; quasi-linear gains are most accurate for symmetric limits"
            ),
        }
    }
}

/// A fully resolved unit of analysis: controller, limits, leader forcing,
/// frequency grid, and solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub gains: ControllerGains,
    pub limits: SaturationLimits,
    /// Amplitude of the leader position oscillation (m).
    pub leader_amplitude: f64,
    /// Analysis frequencies (Hz), strictly increasing.
    pub freq_grid: Vec<f64>,
    pub solver: SolverSettings,
    /// Standstill spacing (m); metadata only, it cancels in oscillatory
    /// coordinates and never enters a computation.
    pub standstill_distance: f64,
    /// Lowest admissible grid frequency (Hz).
    pub freq_floor_hz: f64,
}

impl Scenario {
    /// Checks every invariant; returns the non-fatal warnings. Violations
    /// are reported as errors, never clamped.
    pub fn validate(&self) -> Result<Vec<ScenarioWarning>, ModelError> {
        if self.leader_amplitude.is_nan() || self.leader_amplitude < 0.0 || !self.leader_amplitude.is_finite() {
            return Err(ModelError::InvalidAmplitude(self.leader_amplitude));
        }
        if self.standstill_distance.is_nan() || self.standstill_distance < 0.0 || !self.standstill_distance.is_finite() {
            return Err(ModelError::InvalidStandstill(self.standstill_distance));
        }
        if self.freq_grid.is_empty() {
            return Err(ModelError::EmptyFrequencyGrid);
        }
        for (i, w) in self.freq_grid.windows(2).enumerate() {
            if w[0].is_nan() || w[1].is_nan() || w[0] >= w[1] {
                return Err(ModelError::NonIncreasingGrid { index: i + 1, prev: w[0], next: w[1] });
            }
        }
        let lowest = self.freq_grid[0];
        if lowest < self.freq_floor_hz {
            return Err(ModelError::FrequencyBelowFloor { f: lowest, floor: self.freq_floor_hz });
        }
        self.solver.validate()?;

        let mut warnings = Vec::new();
        if self.limits.accel_active && !rel_close(-self.limits.a_min, self.limits.a_max) {
            warnings.push(ScenarioWarning::AsymmetricAccelBounds {
                a_min: self.limits.a_min,
                a_max: self.limits.a_max,
            });
        }
        if self.limits.speed_active && !rel_close(-self.limits.vt_min, self.limits.vt_max) {
            warnings.push(ScenarioWarning::AsymmetricSpeedBounds {
                vt_min: self.limits.vt_min,
                vt_max: self.limits.vt_max,
            });
        }
        Ok(warnings)
    }

    /// Loop configuration implied by the limit activity flags.
    pub fn loop_config(&self) -> LoopConfig {
        classify_loop(&self.limits)
    }

    /// Angular frequencies `2 pi f` for the grid, in grid order.
    pub fn omega_grid(&self) -> Vec<f64> {
        self.freq_grid.iter().map(|f| std::f64::consts::TAU * f).collect()
    }
}

/// Log-spaced grid used when a scenario gives only a frequency range.
pub fn log_spaced_grid(f_min: f64, f_max: f64, points: usize) -> Vec<f64> {
    assert!(f_min > 0.0 && f_max > f_min && points >= 2);
    let (lo, hi) = (f_min.ln(), f_max.ln());
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (lo + t * (hi - lo)).exp()
        })
        .collect()
}

/// Linearly spaced grid.
pub fn linear_grid(f_min: f64, f_max: f64, points: usize) -> Vec<f64> {
    assert!(f_max > f_min && points >= 2);
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            f_min + t * (f_max - f_min)
        })
        .collect()
}
