//! Describing function of a saturation element, its amplitude derivative,
//! and the incremental-input describing function.
//!
//! For a hard clip to `[lo, hi]` driven by `B sin(wt)`, the describing
//! function is the first-harmonic gain `N(B) = Y11 / B` (the quadrature
//! coefficient `Y12` vanishes for saturation, so the gain is purely real and
//! independent of frequency). Four regimes arise from which bounds the
//! amplitude reaches; the closed forms below are continuous across the
//! regime boundaries.
//!
//! The incremental-input describing function is the gain seen by a small
//! same-frequency perturbation with phase offset `theta` riding on the
//! primary sinusoid:
//!
//! ```text
//! N_inc(B, theta) = N(B) + (B/2) N'(B) (1 + e^{-2i theta})
//! ```
//!
//! As `theta` sweeps a half turn this traces a circle of radius
//! `|B N'(B) / 2|` centered at `N + B N' / 2`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::model::SaturationLimits;

/// Domain or bounds violation in a describing-function evaluation.
#[derive(Debug, Error)]
pub enum DfError {
    #[error("input amplitude must be positive and finite, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("saturation bounds must straddle zero, got [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },
}

/// Which bounds the input amplitude reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaturationCase {
    /// Amplitude below both bounds; the element is transparent.
    Inactive,
    /// Only the lower bound is reached.
    LowerActive,
    /// Only the upper bound is reached.
    UpperActive,
    /// Both bounds are reached.
    BothActive,
}

/// Real describing-function gain together with the regime it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfValue {
    /// Gain in `(0, 1]`.
    pub value: f64,
    pub case: SaturationCase,
}

/// Incremental-input describing-function value at one perturbation phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdfValue {
    pub value: Complex64,
    /// Perturbation phase offset (rad).
    pub theta: f64,
}

fn check_inputs(b: f64, lo: f64, hi: f64) -> Result<(), DfError> {
    if b.is_nan() || b <= 0.0 || !b.is_finite() {
        return Err(DfError::NonPositiveAmplitude(b));
    }
    if lo.is_nan() || hi.is_nan() || lo >= 0.0 || hi <= 0.0 {
        return Err(DfError::InvalidBounds { lo, hi });
    }
    Ok(())
}

/// Exact boundaries resolve to the active-limit closed form; continuity
/// makes the value identical either way.
fn case_of(b: f64, lo: f64, hi: f64) -> SaturationCase {
    let lower = b >= -lo;
    let upper = b >= hi;
    match (lower, upper) {
        (false, false) => SaturationCase::Inactive,
        (true, false) => SaturationCase::LowerActive,
        (false, true) => SaturationCase::UpperActive,
        (true, true) => SaturationCase::BothActive,
    }
}

/// Contribution of one reached bound: `s sqrt(1 - s^2) + asin(s)` with
/// `s = bound / B`.
fn edge_term(bound: f64, b: f64) -> f64 {
    let s = (bound / b).clamp(-1.0, 1.0);
    s * (1.0 - s * s).max(0.0).sqrt() + s.asin()
}

/// First-harmonic gain of the clip to `[lo, hi]` at input amplitude `b`.
pub fn df_saturation(b: f64, lo: f64, hi: f64) -> Result<DfValue, DfError> {
    check_inputs(b, lo, hi)?;
    let case = case_of(b, lo, hi);
    let value = match case {
        SaturationCase::Inactive => 1.0,
        SaturationCase::LowerActive => 0.5 - edge_term(lo, b) / PI,
        SaturationCase::UpperActive => 0.5 + edge_term(hi, b) / PI,
        SaturationCase::BothActive => (edge_term(hi, b) - edge_term(lo, b)) / PI,
    };
    Ok(DfValue { value, case })
}

/// Slope of one reached bound's gain contribution with respect to `b`.
fn edge_slope(bound: f64, b: f64) -> f64 {
    let s = (bound / b).clamp(-1.0, 1.0);
    2.0 * bound / (PI * b * b) * (1.0 - s * s).max(0.0).sqrt()
}

/// Derivative `dN/dB` of [`df_saturation`] with respect to the input
/// amplitude. Non-positive everywhere; zero in the inactive regime. At a
/// regime boundary the one-sided derivative of the active side is returned.
pub fn df_derivative(b: f64, lo: f64, hi: f64) -> Result<f64, DfError> {
    check_inputs(b, lo, hi)?;
    let value = match case_of(b, lo, hi) {
        SaturationCase::Inactive => 0.0,
        SaturationCase::LowerActive => edge_slope(lo, b),
        SaturationCase::UpperActive => -edge_slope(hi, b),
        SaturationCase::BothActive => edge_slope(lo, b) - edge_slope(hi, b),
    };
    Ok(value)
}

/// Incremental-input describing function at perturbation phase `theta`.
///
/// The inactive regime returns exactly `1` for every `theta`. The phase is
/// reduced modulo `pi` first (the value has period `pi` in `theta`, and
/// `fmod` is exact), so equal reduced phases give bit-identical results.
pub fn idf_saturation(b: f64, lo: f64, hi: f64, theta: f64) -> Result<IdfValue, DfError> {
    let df = df_saturation(b, lo, hi)?;
    if df.case == SaturationCase::Inactive {
        return Ok(IdfValue { value: Complex64::new(1.0, 0.0), theta });
    }
    let slope = df_derivative(b, lo, hi)?;
    let u = theta.rem_euclid(PI);
    let factor = Complex64::new(1.0 + (2.0 * u).cos(), -(2.0 * u).sin());
    let value = Complex64::new(df.value, 0.0) + 0.5 * b * slope * factor;
    Ok(IdfValue { value, theta })
}

/// Acceleration-element gain for these limits.
pub fn accel_df(b: f64, limits: &SaturationLimits) -> Result<DfValue, DfError> {
    df_saturation(b, limits.a_min, limits.a_max)
}

/// Velocity-element gain for these limits (oscillatory bounds).
pub fn speed_df(b: f64, limits: &SaturationLimits) -> Result<DfValue, DfError> {
    df_saturation(b, limits.vt_min, limits.vt_max)
}

/// Acceleration-element incremental gain.
pub fn accel_idf(b: f64, limits: &SaturationLimits, theta: f64) -> Result<IdfValue, DfError> {
    idf_saturation(b, limits.a_min, limits.a_max, theta)
}

/// Velocity-element incremental gain.
pub fn speed_idf(b: f64, limits: &SaturationLimits, theta: f64) -> Result<IdfValue, DfError> {
    idf_saturation(b, limits.vt_min, limits.vt_max, theta)
}
