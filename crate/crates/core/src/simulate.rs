//! Time-domain reference for the analytic machinery: fixed-step integration
//! of the saturated loop and first-harmonic extraction.
//!
//! The loop is integrated with the classic fourth-order Runge-Kutta scheme.
//! Both clips act inside the derivative evaluation, matching the block
//! semantics: the velocity state integrates the clipped acceleration, the
//! position integrates the clipped velocity, and the feedback reads the
//! clipped velocity.
//!
//! Steady-state measurement is streaming: the integrator keeps per-period
//! trapezoid accumulators of the first-harmonic projections instead of the
//! raw samples, gates on two consecutive periods agreeing, then fits over
//! the measurement window. Stored trajectories are only produced by
//! [`simulate`], whose memory use is proportional to `duration / dt`.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::balance::{FrequencyResponsePoint, ResponseMethod};
use crate::model::{Scenario, SolverSettings};
use crate::phase::circular_diff;

/// Relative agreement required between two consecutive period fits before
/// the steady-state measurement starts.
const GATE_REL_TOL: f64 = 1e-3;

/// Extra periods allowed for the steady-state gate beyond the settle phase.
const MAX_GATE_PERIODS: usize = 200;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("state became non-finite at step {step} (t = {t:.3} s)")]
    Diverged { step: usize, t: f64 },
    #[error(
        "steady state not reached after {periods} periods: consecutive fits ({prev_amplitude:.6e}, {prev_phase:.6e}) vs ({amplitude:.6e}, {phase:.6e})"
    )]
    NonConvergence { periods: usize, prev_amplitude: f64, prev_phase: f64, amplitude: f64, phase: f64 },
    #[error("window spans {span:.6e} s, not an integer multiple of the period {period:.6e} s")]
    WindowNotPeriodic { span: f64, period: f64 },
    #[error("window [{start}, {end}] out of range for {len} samples")]
    WindowOutOfRange { start: usize, end: usize, len: usize },
    #[error("frequency response is undefined for zero leader amplitude")]
    UndefinedResponse,
    #[error("omega must be positive and finite, got {0}")]
    InvalidOmega(f64),
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
}

/// Initial follower state in oscillatory coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct InitialState {
    pub position: f64,
    pub velocity: f64,
}

/// Stored trajectory on a uniform time grid.
#[derive(Debug, Clone)]
pub struct SimTrajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    /// Leader oscillatory position.
    pub leader: Vec<f64>,
    /// Follower oscillatory position.
    pub follower: Vec<f64>,
    /// Raw follower velocity state (before the velocity clip).
    pub velocity: Vec<f64>,
    /// Acceleration actually applied (after the clip).
    pub accel_applied: Vec<f64>,
    /// Steps per forcing period, when the run was periodic.
    pub steps_per_period: Option<usize>,
}

impl SimTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// First-harmonic fit of a signal against `sin(w t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicFit {
    pub amplitude: f64,
    /// Phase relative to `sin(w t)` (rad), principal value.
    pub phase: f64,
    /// Fraction of the window's mean-square signal outside the first
    /// harmonic (DC included).
    pub residual_fraction: f64,
}

/// Steady-state harmonic content of the loop signals.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateMeasurement {
    /// Follower position.
    pub position: HarmonicFit,
    /// Unclipped acceleration command (input of the acceleration clip).
    pub accel_command: HarmonicFit,
    /// Raw velocity state (input of the velocity clip).
    pub velocity: HarmonicFit,
    /// Periods integrated in total.
    pub periods_total: usize,
    /// Effective step after rounding a period to a whole number of steps.
    pub dt: f64,
}

/// Decay test outcome for the zero-forcing loop.
#[derive(Debug, Clone, Copy)]
pub struct DecayReport {
    pub initial_offset: f64,
    pub horizon: f64,
    /// Largest `|position|` over the final tenth of the horizon.
    pub max_tail: f64,
    /// `1e-3 * |offset|`.
    pub threshold: f64,
    pub passed: bool,
}

struct LoopRhs<'a> {
    scenario: &'a Scenario,
    omega: f64,
}

impl LoopRhs<'_> {
    #[inline]
    fn derivs(&self, t: f64, p: f64, v: f64) -> (f64, f64) {
        let g = &self.scenario.gains;
        let l = &self.scenario.limits;
        let r = self.scenario.leader_amplitude;
        let (leader_p, leader_v) = if r == 0.0 {
            (0.0, 0.0)
        } else {
            let wt = self.omega * t;
            (r * wt.sin(), r * self.omega * wt.cos())
        };
        let v_applied = v.clamp(l.vt_min, l.vt_max);
        let a_cmd = g.k1 * (leader_p - p) + g.k2 * leader_v + g.k3 * v_applied;
        (v_applied, a_cmd.clamp(l.a_min, l.a_max))
    }

    #[inline]
    fn rk4_step(&self, t: f64, p: f64, v: f64, dt: f64) -> (f64, f64) {
        let (k1p, k1v) = self.derivs(t, p, v);
        let (k2p, k2v) = self.derivs(t + 0.5 * dt, p + 0.5 * dt * k1p, v + 0.5 * dt * k1v);
        let (k3p, k3v) = self.derivs(t + 0.5 * dt, p + 0.5 * dt * k2p, v + 0.5 * dt * k2v);
        let (k4p, k4v) = self.derivs(t + dt, p + dt * k3p, v + dt * k3v);
        (
            p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
            v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }

    #[inline]
    fn sample(&self, t: f64, p: f64, v: f64) -> (f64, f64, f64) {
        // (leader position, acceleration command, applied acceleration)
        let g = &self.scenario.gains;
        let l = &self.scenario.limits;
        let r = self.scenario.leader_amplitude;
        let (leader_p, leader_v) = if r == 0.0 {
            (0.0, 0.0)
        } else {
            let wt = self.omega * t;
            (r * wt.sin(), r * self.omega * wt.cos())
        };
        let v_applied = v.clamp(l.vt_min, l.vt_max);
        let a_cmd = g.k1 * (leader_p - p) + g.k2 * leader_v + g.k3 * v_applied;
        (leader_p, a_cmd, a_cmd.clamp(l.a_min, l.a_max))
    }
}

/// Step size and whole-period step count for a forcing frequency: the
/// requested step, capped at `0.01 s` and a thousandth of the period, then
/// rounded down so a period is an exact number of steps.
fn period_steps(omega: f64, settings: &SolverSettings) -> (f64, usize) {
    let period = TAU / omega;
    let dt_req = settings.dt.min(0.01).min(1e-3 * period);
    let spp = (period / dt_req).ceil() as usize;
    (period / spp as f64, spp)
}

/// Integrates the forced loop over `settle + measure` periods and stores
/// every sample. Initial conditions default to rest.
pub fn simulate(
    scenario: &Scenario,
    omega: f64,
    settings: &SolverSettings,
    initial: InitialState,
) -> Result<SimTrajectory, SimError> {
    if omega.is_nan() || omega <= 0.0 || !omega.is_finite() {
        return Err(SimError::InvalidOmega(omega));
    }
    let (dt, spp) = period_steps(omega, settings);
    let periods = settings.settle_periods + settings.measure_periods;
    let n_steps = spp * periods;
    let rhs = LoopRhs { scenario, omega };
    let mut traj = SimTrajectory {
        dt,
        t: Vec::with_capacity(n_steps + 1),
        leader: Vec::with_capacity(n_steps + 1),
        follower: Vec::with_capacity(n_steps + 1),
        velocity: Vec::with_capacity(n_steps + 1),
        accel_applied: Vec::with_capacity(n_steps + 1),
        steps_per_period: Some(spp),
    };
    let (mut p, mut v) = (initial.position, initial.velocity);
    for step in 0..=n_steps {
        let t = step as f64 * dt;
        if !p.is_finite() || !v.is_finite() {
            return Err(SimError::Diverged { step, t });
        }
        let (leader_p, _a_cmd, a_app) = rhs.sample(t, p, v);
        traj.t.push(t);
        traj.leader.push(leader_p);
        traj.follower.push(p);
        traj.velocity.push(v);
        traj.accel_applied.push(a_app);
        if step < n_steps {
            (p, v) = rhs.rk4_step(t, p, v, dt);
        }
    }
    Ok(traj)
}

/// First-harmonic projection of the follower position over the inclusive
/// sample window `[start, end]`, which must span a whole number of periods.
pub fn extract_first_harmonic(
    traj: &SimTrajectory,
    omega: f64,
    start: usize,
    end: usize,
) -> Result<HarmonicFit, SimError> {
    if end <= start || end >= traj.len() {
        return Err(SimError::WindowOutOfRange { start, end, len: traj.len() });
    }
    let span = (end - start) as f64 * traj.dt;
    let period = TAU / omega;
    let cycles = (span / period).round();
    if cycles < 1.0 || ((span - cycles * period) / period).abs() > 1e-6 {
        return Err(SimError::WindowNotPeriodic { span, period });
    }
    let mut acc = ProjAccum::default();
    for i in start..=end {
        let w = if i == start || i == end { 0.5 } else { 1.0 };
        acc.add(w, omega * traj.t[i], traj.follower[i]);
    }
    Ok(acc.fit(span / traj.dt))
}

/// Trapezoid accumulator of the projections of one signal.
#[derive(Debug, Clone, Copy, Default)]
struct ProjAccum {
    sin_sum: f64,
    cos_sum: f64,
    sq_sum: f64,
}

impl ProjAccum {
    #[inline]
    fn add(&mut self, weight: f64, wt: f64, y: f64) {
        self.sin_sum += weight * y * wt.sin();
        self.cos_sum += weight * y * wt.cos();
        self.sq_sum += weight * y * y;
    }

    fn merge(&mut self, other: &ProjAccum) {
        self.sin_sum += other.sin_sum;
        self.cos_sum += other.cos_sum;
        self.sq_sum += other.sq_sum;
    }

    /// Fit from sums accumulated over `steps` uniform intervals.
    fn fit(&self, steps: f64) -> HarmonicFit {
        // Y11 = (2/T) int y sin, Y12 = (2/T) int y cos; dt cancels in the ratio.
        let y11 = 2.0 * self.sin_sum / steps;
        let y12 = 2.0 * self.cos_sum / steps;
        let amplitude = y11.hypot(y12);
        let phase = y12.atan2(y11);
        let mean_square = self.sq_sum / steps;
        let first = 0.5 * amplitude * amplitude;
        let residual_fraction = if mean_square > 0.0 {
            ((mean_square - first) / mean_square).clamp(0.0, 1.0)
        } else {
            0.0
        };
        HarmonicFit { amplitude, phase, residual_fraction }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PeriodAccums {
    position: ProjAccum,
    accel_cmd: ProjAccum,
    velocity: ProjAccum,
}

/// Integrates until the per-period position fit settles, then measures the
/// harmonic content of the loop signals over `measure_periods`.
pub fn measure_steady_state(
    scenario: &Scenario,
    omega: f64,
    settings: &SolverSettings,
) -> Result<SteadyStateMeasurement, SimError> {
    if omega.is_nan() || omega <= 0.0 || !omega.is_finite() {
        return Err(SimError::InvalidOmega(omega));
    }
    let (dt, spp) = period_steps(omega, settings);
    let period = TAU / omega;
    let rhs = LoopRhs { scenario, omega };
    let (mut p, mut v) = (0.0_f64, 0.0_f64);
    let mut period_index = 0usize;
    let mut recent: VecDeque<PeriodAccums> = VecDeque::with_capacity(settings.measure_periods + 1);

    // Runs one period, returning its accumulators; weights the two boundary
    // nodes by one half so per-period integrals compose exactly.
    let run_period = |p: &mut f64, v: &mut f64, j: usize| -> Result<PeriodAccums, SimError> {
        let t0 = j as f64 * period;
        let mut acc = PeriodAccums::default();
        for i in 0..=spp {
            let t = t0 + i as f64 * dt;
            if !p.is_finite() || !v.is_finite() {
                return Err(SimError::Diverged { step: j * spp + i, t });
            }
            let w = if i == 0 || i == spp { 0.5 } else { 1.0 };
            let (_, a_cmd, _) = rhs.sample(t, *p, *v);
            let wt = omega * t;
            acc.position.add(w, wt, *p);
            acc.accel_cmd.add(w, wt, a_cmd);
            acc.velocity.add(w, wt, *v);
            if i < spp {
                (*p, *v) = rhs.rk4_step(t, *p, *v, dt);
            }
        }
        Ok(acc)
    };

    for _ in 0..settings.settle_periods {
        run_period(&mut p, &mut v, period_index)?;
        period_index += 1;
    }

    // Gate: two consecutive period fits of the position must agree.
    let mut prev_fit: Option<HarmonicFit> = None;
    let mut converged = false;
    for _ in 0..MAX_GATE_PERIODS {
        let acc = run_period(&mut p, &mut v, period_index)?;
        period_index += 1;
        let fit = acc.position.fit(spp as f64);
        if let Some(prev) = prev_fit {
            let scale = fit.amplitude.abs().max(1e-12 * scenario.leader_amplitude.max(1.0));
            if (fit.amplitude - prev.amplitude).abs() <= GATE_REL_TOL * scale
                && circular_diff(fit.phase, prev.phase).abs() <= GATE_REL_TOL
            {
                converged = true;
                break;
            }
        }
        prev_fit = Some(fit);
    }
    if !converged {
        let last = prev_fit.unwrap_or(HarmonicFit {
            amplitude: f64::NAN,
            phase: f64::NAN,
            residual_fraction: f64::NAN,
        });
        // One more period for the error report.
        let acc = run_period(&mut p, &mut v, period_index)?;
        let fit = acc.position.fit(spp as f64);
        return Err(SimError::NonConvergence {
            periods: period_index,
            prev_amplitude: last.amplitude,
            prev_phase: last.phase,
            amplitude: fit.amplitude,
            phase: fit.phase,
        });
    }

    for _ in 0..settings.measure_periods {
        let acc = run_period(&mut p, &mut v, period_index)?;
        period_index += 1;
        recent.push_back(acc);
    }
    let mut combined = PeriodAccums::default();
    for acc in &recent {
        combined.position.merge(&acc.position);
        combined.accel_cmd.merge(&acc.accel_cmd);
        combined.velocity.merge(&acc.velocity);
    }
    let steps = (settings.measure_periods * spp) as f64;
    Ok(SteadyStateMeasurement {
        position: combined.position.fit(steps),
        accel_command: combined.accel_cmd.fit(steps),
        velocity: combined.velocity.fit(steps),
        periods_total: period_index,
        dt,
    })
}

/// Reference frequency response from the time-domain loop.
pub fn estimate_frequency_response(
    scenario: &Scenario,
    omega: f64,
    settings: &SolverSettings,
) -> Result<FrequencyResponsePoint, SimError> {
    if scenario.leader_amplitude <= 0.0 {
        return Err(SimError::UndefinedResponse);
    }
    let m = measure_steady_state(scenario, omega, settings)?;
    let magnitude = m.position.amplitude / scenario.leader_amplitude;
    Ok(FrequencyResponsePoint {
        omega,
        magnitude,
        phase: m.position.phase,
        phase_unwrapped: m.position.phase,
        method: ResponseMethod::Simulation,
    })
}

/// Integrates the zero-forcing loop from a position offset and checks the
/// tail envelope: the final tenth of the horizon must stay at or below
/// `1e-3` of the offset.
pub fn decay_check(
    scenario: &Scenario,
    initial_offset: f64,
    horizon: f64,
    settings: &SolverSettings,
) -> Result<DecayReport, SimError> {
    if horizon.is_nan() || horizon <= 0.0 || !horizon.is_finite() {
        return Err(SimError::InvalidHorizon(horizon));
    }
    let mut quiet = scenario.clone();
    quiet.leader_amplitude = 0.0;
    let dt = settings.dt.min(0.01);
    let n_steps = (horizon / dt).ceil() as usize;
    let tail_start = n_steps - n_steps / 10;
    let rhs = LoopRhs { scenario: &quiet, omega: 1.0 };
    let (mut p, mut v) = (initial_offset, 0.0_f64);
    let mut max_tail = initial_offset.abs() * if tail_start == 0 { 1.0 } else { 0.0 };
    for step in 0..=n_steps {
        let t = step as f64 * dt;
        if !p.is_finite() || !v.is_finite() {
            return Err(SimError::Diverged { step, t });
        }
        if step >= tail_start && p.abs() > max_tail {
            max_tail = p.abs();
        }
        if step < n_steps {
            (p, v) = rhs.rk4_step(t, p, v, dt);
        }
    }
    let threshold = 1e-3 * initial_offset.abs();
    Ok(DecayReport {
        initial_offset,
        horizon,
        max_tail,
        threshold,
        passed: max_tail <= threshold,
    })
}
