//! Stability of forced-oscillation candidates.
//!
//! A small same-frequency perturbation around a candidate sees the loop
//! through the incremental-input gains. Splitting the follower-velocity
//! feedback as `k3 v = k2 v + (k3 - k2) v` puts the perturbation loop in
//! unity-feedback form with the inner transfer
//!
//! ```text
//! H(s) = P / (s - (k3 - k2) P)            P = product of incremental gains
//! T_o(s) = (k1 + k2 s) H(s) / s
//! ```
//!
//! evaluated at `s = i w0`. Sweeping the perturbation phase `theta` over a
//! full turn traces a closed locus (an exact circle: the incremental gain's
//! circle composed with a Moebius map); the candidate is stable when the
//! locus does not encircle `(-1, 0)`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

use crate::balance::{OscillationCandidate, StabilityVerdict};
use crate::describing::{df_saturation, idf_saturation, DfError};
use crate::model::{ControllerGains, LoopConfig, SaturationLimits, SolverSettings};

/// Distance below which the `H` denominator counts as a pole on the locus.
const POLE_TOL: f64 = 1e-12;

/// Distance from the critical point below which the verdict is withheld.
const CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Df(#[from] DfError),
    #[error("incremental-loop pole on the locus at theta={theta}: |denominator|={denom:.3e}")]
    PoleOnLocus { theta: f64, denom: f64 },
    #[error("no candidates to select from")]
    EmptyCandidates,
}

/// Product of the incremental gains around the perturbation loop at phase
/// `theta` (the acceleration element's phase for acceleration-referenced
/// loops, the velocity element's otherwise).
///
/// For the combined loop the velocity element sees the perturbation after
/// the acceleration element and an integrator, so its amplitude and phase
/// offset follow: `B_v = B N_a(B) / w0`, `theta_v = theta + arg N_a_inc - pi/2`.
pub fn incremental_gain(
    candidate: &OscillationCandidate,
    limits: &SaturationLimits,
    theta: f64,
) -> Result<Complex64, DfError> {
    let b = candidate.amplitude;
    match candidate.loop_config {
        LoopConfig::Linear => Ok(Complex64::new(1.0, 0.0)),
        LoopConfig::ControlOnly => Ok(idf_saturation(b, limits.a_min, limits.a_max, theta)?.value),
        LoopConfig::StateOnly => Ok(idf_saturation(b, limits.vt_min, limits.vt_max, theta)?.value),
        LoopConfig::Both => {
            let n_a_inc = idf_saturation(b, limits.a_min, limits.a_max, theta)?.value;
            let n_a = df_saturation(b, limits.a_min, limits.a_max)?.value;
            let b_v = b * n_a / candidate.omega;
            let theta_v = theta + n_a_inc.arg() - FRAC_PI_2;
            let n_v_inc = idf_saturation(b_v, limits.vt_min, limits.vt_max, theta_v)?.value;
            Ok(n_a_inc * n_v_inc)
        }
    }
}

/// Inner transfer `H(i w0)` of the perturbation loop at phase `theta`.
pub fn incremental_h(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta: f64,
) -> Result<Complex64, StabilityError> {
    let p = incremental_gain(candidate, limits, theta)?;
    let s = Complex64::new(0.0, candidate.omega);
    let denom = s - (gains.k3 - gains.k2) * p;
    if denom.norm() < POLE_TOL {
        return Err(StabilityError::PoleOnLocus { theta, denom: denom.norm() });
    }
    Ok(p / denom)
}

/// Open-loop transfer `T_o(i w0)` of the perturbation loop at phase `theta`.
pub fn open_loop_transfer(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta: f64,
) -> Result<Complex64, StabilityError> {
    open_loop_at(candidate, gains, limits, theta, candidate.omega)
}

fn open_loop_at(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta: f64,
    omega: f64,
) -> Result<Complex64, StabilityError> {
    let p = incremental_gain(candidate, limits, theta)?;
    let s = Complex64::new(0.0, omega);
    let denom = s - (gains.k3 - gains.k2) * p;
    if denom.norm() < POLE_TOL {
        return Err(StabilityError::PoleOnLocus { theta, denom: denom.norm() });
    }
    let h = p / denom;
    Ok(Complex64::new(gains.k1, gains.k2 * omega) * h / s)
}

/// One sample of the open-loop locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    pub theta: f64,
    pub value: Complex64,
}

/// Samples the open-loop locus over a full turn of the perturbation phase.
/// The sequence is closed: `theta` runs `0 ..= 2 pi` in `theta_samples`
/// points, so the last point repeats the first.
pub fn open_loop_locus(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta_samples: usize,
) -> Result<Vec<LocusPoint>, StabilityError> {
    locus_at(candidate, gains, limits, theta_samples, candidate.omega)
}

fn locus_at(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta_samples: usize,
    omega: f64,
) -> Result<Vec<LocusPoint>, StabilityError> {
    assert!(theta_samples >= 128, "locus needs at least 128 samples");
    let n = theta_samples;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        // Divide first: the last sample lands on exactly 2 pi, and the
        // half-turn phase reduction maps it onto the first sample bit-exactly.
        let theta = TAU * (i as f64 / (n - 1) as f64);
        let value = open_loop_at(candidate, gains, limits, theta, omega)?;
        points.push(LocusPoint { theta, value });
    }
    Ok(points)
}

/// Signed turns of the closed polygon through `points` around `center`,
/// from summed angle increments. The closing edge back to the first point
/// is implied when the sequence is not already closed.
pub fn winding_number(points: &[Complex64], center: Complex64) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut prev = points[0] - center;
    for &p in points[1..].iter().chain(std::iter::once(&points[0])) {
        let cur = p - center;
        // Angle increment via the argument of the ratio, robust near the axis.
        total += (cur * prev.conj()).arg();
        prev = cur;
    }
    total / TAU
}

/// Classifies one candidate by its locus at the candidate's own frequency.
pub fn classify_stability(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    settings: &SolverSettings,
) -> StabilityVerdict {
    verdict_for_locus(candidate, gains, limits, settings.theta_samples, candidate.omega)
}

/// Conservative variant: the locus must avoid encircling the critical point
/// at every frequency of `omega_grid`, not only at the candidate's own.
pub fn classify_stability_full_sweep(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    settings: &SolverSettings,
    omega_grid: &[f64],
) -> StabilityVerdict {
    let mut verdict = classify_stability(candidate, gains, limits, settings);
    if verdict != StabilityVerdict::Stable {
        return verdict;
    }
    for &omega in omega_grid {
        verdict = verdict_for_locus(candidate, gains, limits, settings.theta_samples, omega);
        if verdict != StabilityVerdict::Stable {
            return verdict;
        }
    }
    verdict
}

fn verdict_for_locus(
    candidate: &OscillationCandidate,
    gains: &ControllerGains,
    limits: &SaturationLimits,
    theta_samples: usize,
    omega: f64,
) -> StabilityVerdict {
    let critical = Complex64::new(-1.0, 0.0);
    let points = match locus_at(candidate, gains, limits, theta_samples, omega) {
        Ok(p) => p,
        Err(_) => return StabilityVerdict::Indeterminate,
    };
    if points.iter().any(|p| (p.value - critical).norm() < CRITICAL_TOL) {
        return StabilityVerdict::Indeterminate;
    }
    let values: Vec<Complex64> = points.iter().map(|p| p.value).collect();
    let w = winding_number(&values, critical);
    if w.abs() < 0.5 {
        StabilityVerdict::Stable
    } else {
        StabilityVerdict::Unstable
    }
}

/// Classifies every candidate in place.
pub fn classify_candidates(
    candidates: &mut [OscillationCandidate],
    gains: &ControllerGains,
    limits: &SaturationLimits,
    settings: &SolverSettings,
    full_sweep_grid: Option<&[f64]>,
) {
    for c in candidates.iter_mut() {
        c.stability = match full_sweep_grid {
            Some(grid) => classify_stability_full_sweep(c, gains, limits, settings, grid),
            None => classify_stability(c, gains, limits, settings),
        };
    }
}

/// Outcome of picking the physical response among classified candidates.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    /// The stable candidate the loop is predicted to realize, if any.
    pub selected: Option<OscillationCandidate>,
    /// More than one stable candidate existed; the smallest amplitude was
    /// chosen and all of them are listed in `candidates`.
    pub ambiguous: bool,
    pub n_stable: usize,
    pub n_unstable: usize,
    pub n_indeterminate: usize,
    /// All classified candidates, amplitude-ascending.
    pub candidates: Vec<OscillationCandidate>,
}

impl SelectionReport {
    pub fn no_stable_solution(&self) -> bool {
        self.selected.is_none()
    }
}

/// Discards unstable candidates and selects the stable response; with
/// several stable ones the smallest amplitude wins and the report is marked
/// ambiguous. Indeterminate candidates never win but stay visible.
pub fn select_response(
    candidates: &[OscillationCandidate],
) -> Result<SelectionReport, StabilityError> {
    if candidates.is_empty() {
        return Err(StabilityError::EmptyCandidates);
    }
    let mut sorted: Vec<OscillationCandidate> = candidates.to_vec();
    sorted.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
    let n_stable = sorted.iter().filter(|c| c.stability == StabilityVerdict::Stable).count();
    let n_unstable = sorted.iter().filter(|c| c.stability == StabilityVerdict::Unstable).count();
    let n_indeterminate =
        sorted.iter().filter(|c| c.stability == StabilityVerdict::Indeterminate).count();
    let selected = sorted.iter().find(|c| c.stability == StabilityVerdict::Stable).copied();
    Ok(SelectionReport {
        selected,
        ambiguous: n_stable > 1,
        n_stable,
        n_unstable,
        n_indeterminate,
        candidates: sorted,
    })
}
