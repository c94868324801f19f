//! First-harmonic balance of the saturated loop.
//!
//! With the saturation elements replaced by their real amplitude-dependent
//! gains, balancing the first harmonic around the loop reduces to a scalar
//! equation in the amplitude `B` at the saturation input. In phasor form,
//! with `N` the effective gain at amplitude `B`,
//!
//! ```text
//! D(B) = (1 - k1 N / w^2) + i (k3 N / w)
//! U    = k1 + i w k2            (acceleration-referenced loops)
//! U    = k2 - i k1 / w          (velocity-referenced loop)
//! g(B) = B |D(B)| - R |U|,      phi = arg U - arg D
//! ```
//!
//! Roots of `g` are the forced-oscillation candidates; the phase of the
//! closed-loop response follows from `phi` and the integrators between the
//! saturation input and the position output. With no saturation reached the
//! machinery degenerates exactly to the linear closed form
//! `F(w) = (k1 + i w k2) / (k1 - w^2 - i w k3)`.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

use crate::describing::{df_saturation, DfError, SaturationCase};
use crate::model::{classify_loop, ControllerGains, LoopConfig, SaturationLimits, SolverSettings};
use crate::phase::wrap_to_pi;
use crate::rootfind::brent;

/// Failure in candidate solving or response evaluation.
#[derive(Debug, Error)]
pub enum BalanceError {
    #[error(transparent)]
    Df(#[from] DfError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("omega must be positive and finite, got {0}")]
    InvalidOmega(f64),
    #[error(
        "no balance root in (0, {b_max:.6e}] at omega={omega:.6e}: g spans [{g_first:.6e}, {g_last:.6e}] without a sign change"
    )]
    NoRootFound { omega: f64, b_max: f64, g_first: f64, g_last: f64 },
    #[error("frequency response is undefined for zero leader amplitude")]
    UndefinedResponse,
    #[error("limit-cycle check requires zero leader amplitude, got R={0}")]
    NonZeroAmplitude(f64),
}

/// One balance problem: a loop at a single angular frequency.
#[derive(Debug, Clone, Copy)]
pub struct BalanceProblem {
    pub loop_config: LoopConfig,
    pub gains: ControllerGains,
    pub limits: SaturationLimits,
    /// Leader position amplitude (m).
    pub leader_amplitude: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
}

impl BalanceProblem {
    pub fn new(
        gains: ControllerGains,
        limits: SaturationLimits,
        leader_amplitude: f64,
        omega: f64,
    ) -> Result<Self, BalanceError> {
        if omega.is_nan() || omega <= 0.0 || !omega.is_finite() {
            return Err(BalanceError::InvalidOmega(omega));
        }
        Ok(Self { loop_config: classify_loop(&limits), gains, limits, leader_amplitude, omega })
    }

    /// Forcing phasor `U` on the right-hand side of the balance.
    pub fn forcing(&self) -> Complex64 {
        let g = &self.gains;
        match self.loop_config {
            LoopConfig::StateOnly => Complex64::new(g.k2, -g.k1 / self.omega),
            _ => Complex64::new(g.k1, self.omega * g.k2),
        }
    }

    /// Loop denominator phasor `D` for an effective gain `n_eff`.
    pub fn denominator(&self, n_eff: f64) -> Complex64 {
        let g = &self.gains;
        let w = self.omega;
        Complex64::new(1.0 - g.k1 * n_eff / (w * w), g.k3 * n_eff / w)
    }
}

/// Stability verdict attached to a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// Not classified yet.
    Unknown,
    Stable,
    Unstable,
    /// The locus test was inconclusive (pole on the locus or a sample on
    /// the critical point); surfaced for adjudication, never dropped.
    Indeterminate,
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StabilityVerdict::Unknown => "unknown",
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Indeterminate => "indeterminate",
        };
        f.write_str(s)
    }
}

/// A solution of the first-harmonic balance at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationCandidate {
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Amplitude at the saturation input: commanded acceleration (m/s^2)
    /// for acceleration-referenced loops, velocity (m/s) for the
    /// velocity-referenced loop.
    pub amplitude: f64,
    /// Phase of that input relative to the leader position (rad).
    pub phase: f64,
    pub loop_config: LoopConfig,
    /// `|g|` achieved at the root.
    pub residual: f64,
    pub stability: StabilityVerdict,
}

/// How a frequency-response value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseMethod {
    /// Quasi-linear balance with stability screening.
    Idf,
    /// Linear closed form.
    Linear,
    /// Time-domain integration and harmonic extraction.
    Simulation,
}

/// Complex frequency response in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyResponsePoint {
    pub omega: f64,
    /// `|F|`, dimensionless.
    pub magnitude: f64,
    /// Principal-value phase in `(-pi, pi]` (rad).
    pub phase: f64,
    /// Continuity-unwrapped phase; equals `phase` until a sweep rewrites it.
    pub phase_unwrapped: f64,
    pub method: ResponseMethod,
}

/// Effective first-harmonic gain seen by the balance at amplitude `b`.
///
/// For the combined loop the velocity-element amplitude follows from the
/// acceleration one through the integrator: `B_v = B N_a(B) / w`.
pub fn effective_gain(b: f64, problem: &BalanceProblem) -> Result<f64, DfError> {
    let limits = &problem.limits;
    match problem.loop_config {
        LoopConfig::Linear => Ok(1.0),
        LoopConfig::ControlOnly => Ok(df_saturation(b, limits.a_min, limits.a_max)?.value),
        LoopConfig::StateOnly => Ok(df_saturation(b, limits.vt_min, limits.vt_max)?.value),
        LoopConfig::Both => {
            let n_a = df_saturation(b, limits.a_min, limits.a_max)?.value;
            let b_v = b * n_a / problem.omega;
            let n_v = df_saturation(b_v, limits.vt_min, limits.vt_max)?.value;
            Ok(n_a * n_v)
        }
    }
}

/// Saturation regimes at amplitude `b`: `(acceleration, velocity)`.
/// Elements outside the loop report `Inactive`.
pub fn saturation_cases(
    b: f64,
    problem: &BalanceProblem,
) -> Result<(SaturationCase, SaturationCase), DfError> {
    let limits = &problem.limits;
    match problem.loop_config {
        LoopConfig::Linear => Ok((SaturationCase::Inactive, SaturationCase::Inactive)),
        LoopConfig::ControlOnly => {
            Ok((df_saturation(b, limits.a_min, limits.a_max)?.case, SaturationCase::Inactive))
        }
        LoopConfig::StateOnly => {
            Ok((SaturationCase::Inactive, df_saturation(b, limits.vt_min, limits.vt_max)?.case))
        }
        LoopConfig::Both => {
            let a = df_saturation(b, limits.a_min, limits.a_max)?;
            let b_v = b * a.value / problem.omega;
            let v = df_saturation(b_v, limits.vt_min, limits.vt_max)?;
            Ok((a.case, v.case))
        }
    }
}

/// True when any saturation is reached at amplitude `b`.
pub fn limits_reached(b: f64, problem: &BalanceProblem) -> Result<bool, DfError> {
    let (a, v) = saturation_cases(b, problem)?;
    Ok(a != SaturationCase::Inactive || v != SaturationCase::Inactive)
}

/// Amplitude residual `g` and input phase `phi` of the balance at `b`.
pub fn balance_residual(b: f64, problem: &BalanceProblem) -> Result<(f64, f64), DfError> {
    let n = effective_gain(b, problem)?;
    let d = problem.denominator(n);
    let u = problem.forcing();
    let g = b * d.norm() - problem.leader_amplitude * u.norm();
    let phi = wrap_to_pi(u.arg() - d.arg());
    Ok((g, phi))
}

/// Automatic amplitude-sweep ceiling: five times the unsaturated root, with
/// a floor of ten times the largest saturation/forcing scale. Saturated
/// roots always exceed the unsaturated one (the gain shrink reduces `|D|`),
/// and `k1 R + k2 w R >= R |U|` keeps `g(ceiling) > 0`.
pub fn default_amplitude_ceiling(problem: &BalanceProblem) -> f64 {
    let r = problem.leader_amplitude;
    let w = problem.omega;
    let g = &problem.gains;
    let linear_root = r * problem.forcing().norm() / problem.denominator(1.0).norm();
    let bound_scale = match problem.loop_config {
        // The swept amplitude lives in the units of the loop's own element.
        LoopConfig::StateOnly => finite_mag(problem.limits.vt_min).max(finite_mag(problem.limits.vt_max)),
        _ => finite_mag(problem.limits.a_min).max(finite_mag(problem.limits.a_max)),
    };
    let floor = 10.0 * bound_scale.max(g.k1 * r + g.k2 * w * r);
    (5.0 * linear_root).max(floor).max(1.0)
}

fn finite_mag(x: f64) -> f64 {
    if x.is_finite() {
        x.abs()
    } else {
        0.0
    }
}

/// Scans `g` over `(0, b_max]`, refines every sign change, and returns the
/// deduplicated candidates sorted by amplitude. The linear configuration
/// bypasses the scan with its closed form; zero leader amplitude yields an
/// empty list (the zero solution is the only one).
pub fn solve_candidates(
    problem: &BalanceProblem,
    settings: &SolverSettings,
) -> Result<Vec<OscillationCandidate>, BalanceError> {
    settings.validate()?;
    let r = problem.leader_amplitude;
    if r == 0.0 {
        return Ok(Vec::new());
    }

    if problem.loop_config == LoopConfig::Linear {
        let u = problem.forcing();
        let d = problem.denominator(1.0);
        let amplitude = r * u.norm() / d.norm();
        let phase = wrap_to_pi(u.arg() - d.arg());
        return Ok(vec![OscillationCandidate {
            omega: problem.omega,
            amplitude,
            phase,
            loop_config: LoopConfig::Linear,
            residual: 0.0,
            stability: StabilityVerdict::Unknown,
        }]);
    }

    let b_max = settings.b_ini_max.unwrap_or_else(|| default_amplitude_ceiling(problem));
    let n = settings.sweep_points;
    let g_of = |b: f64| balance_residual(b, problem).map(|(g, _)| g);

    // Grid over (0, b_max]; a leading epsilon point captures the g(0+) < 0 limit.
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(b_max * 1e-12);
    for i in 1..=n {
        grid.push(b_max * i as f64 / n as f64);
    }
    let mut values = Vec::with_capacity(grid.len());
    for &b in &grid {
        values.push(g_of(b)?);
    }

    let mut roots: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push((a, 0.0));
            continue;
        }
        if fa.signum() != fb.signum() {
            let mut f = |x: f64| g_of(x).expect("residual evaluation failed inside bracket");
            if let Some(root) = brent(&mut f, a, b, fa, fb, settings.root_tol, 200) {
                roots.push(root);
            }
        }
    }
    if values.last().copied() == Some(0.0) {
        roots.push((b_max, 0.0));
    }

    if roots.is_empty() {
        return Err(BalanceError::NoRootFound {
            omega: problem.omega,
            b_max,
            g_first: values[0],
            g_last: *values.last().unwrap(),
        });
    }

    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dedup_tol = 1e-6 * b_max;
    let mut kept: Vec<(f64, f64)> = Vec::new();
    for root in roots {
        match kept.last_mut() {
            Some(last) if (root.0 - last.0).abs() < dedup_tol => {
                if root.1.abs() < last.1.abs() {
                    *last = root;
                }
            }
            _ => kept.push(root),
        }
    }

    let mut candidates = Vec::with_capacity(kept.len());
    for (b, g) in kept {
        let (_, phi) = balance_residual(b, problem)?;
        candidates.push(OscillationCandidate {
            omega: problem.omega,
            amplitude: b,
            phase: phi,
            loop_config: problem.loop_config,
            residual: g.abs(),
            stability: StabilityVerdict::Unknown,
        });
    }
    Ok(candidates)
}

/// Closed-loop response of one candidate: the amplitude at the saturation
/// input propagates to the position output through the element gains and
/// the integrators.
pub fn frequency_response(
    candidate: &OscillationCandidate,
    problem: &BalanceProblem,
) -> Result<FrequencyResponsePoint, BalanceError> {
    let r = problem.leader_amplitude;
    if r == 0.0 {
        return Err(BalanceError::UndefinedResponse);
    }
    let w = candidate.omega;
    let n_eff = effective_gain(candidate.amplitude, problem)?;
    let (magnitude, phase) = match candidate.loop_config {
        LoopConfig::StateOnly => (
            candidate.amplitude * n_eff / (w * r),
            wrap_to_pi(candidate.phase - std::f64::consts::FRAC_PI_2),
        ),
        _ => (
            candidate.amplitude * n_eff / (w * w * r),
            wrap_to_pi(candidate.phase - std::f64::consts::PI),
        ),
    };
    Ok(FrequencyResponsePoint {
        omega: w,
        magnitude,
        phase,
        phase_unwrapped: phase,
        method: ResponseMethod::Idf,
    })
}

/// Linear closed form `F(w) = (k1 + i w k2) / (k1 - w^2 - i w k3)`.
pub fn linear_frequency_response(gains: &ControllerGains, omega: f64) -> FrequencyResponsePoint {
    let num = Complex64::new(gains.k1, omega * gains.k2);
    let den = Complex64::new(gains.k1 - omega * omega, -omega * gains.k3);
    let f = num / den;
    FrequencyResponsePoint {
        omega,
        magnitude: f.norm(),
        phase: f.arg(),
        phase_unwrapped: f.arg(),
        method: ResponseMethod::Linear,
    }
}

/// Frequency where the linear gain crosses 1, if any: `w^2 = 2 k1 + k2^2 - k3^2`.
/// Below the crossing the linear gain exceeds 1.
pub fn linear_crossing_frequency(gains: &ControllerGains) -> Option<f64> {
    let w2 = 2.0 * gains.k1 + gains.k2 * gains.k2 - gains.k3 * gains.k3;
    (w2 > 0.0).then(|| w2.sqrt() / TAU)
}

/// Outcome of the zero-input balance scan at one frequency.
#[derive(Debug, Clone)]
pub struct LimitCycleReport {
    pub omega: f64,
    /// Sweep ceiling used for the scan.
    pub b_max: f64,
    /// Minimum of `g(B)/B = |D(B)|` over the scan grid. Strictly positive:
    /// `k3 < 0` keeps the imaginary part of `D` away from zero wherever the
    /// gain is, so the phase balance cannot close with zero forcing.
    pub min_denominator: f64,
    /// Amplitudes where `|D|` fell below the detection threshold. Non-empty
    /// output is a framework violation, reported rather than raised.
    pub roots: Vec<f64>,
}

impl LimitCycleReport {
    pub fn passed(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Verifies that the zero-input loop admits no sustained oscillation:
/// `g(B) = B |D(B)|` stays positive over the sweep grid.
pub fn check_no_limit_cycle(
    problem: &BalanceProblem,
    settings: &SolverSettings,
) -> Result<LimitCycleReport, BalanceError> {
    if problem.leader_amplitude != 0.0 {
        return Err(BalanceError::NonZeroAmplitude(problem.leader_amplitude));
    }
    settings.validate()?;
    let b_max = settings.b_ini_max.unwrap_or_else(|| default_amplitude_ceiling(problem));
    let n = settings.sweep_points;
    let mut min_denominator = f64::INFINITY;
    let mut roots = Vec::new();
    for i in 1..=n {
        let b = b_max * i as f64 / n as f64;
        let d = problem.denominator(effective_gain(b, problem)?).norm();
        if d < min_denominator {
            min_denominator = d;
        }
        if d < 1e-12 {
            roots.push(b);
        }
    }
    Ok(LimitCycleReport { omega: problem.omega, b_max, min_denominator, roots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SaturationLimits;

    fn gains_default() -> ControllerGains {
        ControllerGains::derive(1.0, 2.0, 1.0).unwrap()
    }

    fn omega_01() -> f64 {
        TAU * 0.1
    }

    #[test]
    fn linear_closed_form_reference_point() {
        let fr = linear_frequency_response(&gains_default(), omega_01());
        assert!((fr.magnitude - 0.8112).abs() < 2e-4);
        assert!((fr.phase + 0.3616).abs() < 2e-4);
    }

    #[test]
    fn linear_candidate_matches_closed_form() {
        let p = BalanceProblem::new(
            gains_default(),
            SaturationLimits::unbounded(),
            1.0,
            omega_01(),
        )
        .unwrap();
        let cands = solve_candidates(&p, &SolverSettings::default()).unwrap();
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        // B = R |U| / |D|.
        assert!((c.amplitude - 0.32025).abs() < 1e-4);
        let fr = frequency_response(c, &p).unwrap();
        let lin = linear_frequency_response(&p.gains, p.omega);
        assert!((fr.magnitude - lin.magnitude).abs() < 1e-12);
        assert!(crate::phase::circular_diff(fr.phase, lin.phase).abs() < 1e-12);
    }

    #[test]
    fn effective_gain_per_configuration() {
        let lims_both = SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap();
        let p = BalanceProblem::new(gains_default(), lims_both, 1.0, omega_01()).unwrap();
        // Velocity amplitude 10 * 0.609 / 0.6283 = 9.69 stays inside the bound,
        // so the combined gain equals the acceleration gain alone.
        let n = effective_gain(10.0, &p).unwrap();
        assert!((n - 0.6090).abs() < 1e-4);

        let lims_ctrl = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
        let p = BalanceProblem::new(gains_default(), lims_ctrl, 1.0, omega_01()).unwrap();
        assert!((effective_gain(10.0, &p).unwrap() - 0.6090).abs() < 1e-4);

        let p = BalanceProblem::new(
            gains_default(),
            SaturationLimits::unbounded(),
            1.0,
            omega_01(),
        )
        .unwrap();
        assert_eq!(effective_gain(123.0, &p).unwrap(), 1.0);
    }

    #[test]
    fn zero_forcing_residual_is_positive() {
        let lims = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
        let p = BalanceProblem::new(gains_default(), lims, 0.0, omega_01()).unwrap();
        for b in [0.1, 1.0, 10.0, 100.0] {
            let (g, _) = balance_residual(b, &p).unwrap();
            assert!(g > 0.0, "g({b}) = {g}");
        }
        assert!(solve_candidates(&p, &SolverSettings::default()).unwrap().is_empty());
    }

    #[test]
    fn saturated_root_near_hand_bracket() {
        let lims = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
        let p = BalanceProblem::new(gains_default(), lims, 20.0, omega_01()).unwrap();
        let cands = solve_candidates(&p, &SolverSettings::default()).unwrap();
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert!((c.amplitude - 27.0).abs() < 0.5, "B = {}", c.amplitude);
        // Residual re-evaluates within tolerance of zero.
        let (g, _) = balance_residual(c.amplitude, &p).unwrap();
        let scale = p.leader_amplitude * p.forcing().norm();
        assert!(g.abs() <= 1e-10 * scale);

        let fr = frequency_response(c, &p).unwrap();
        assert!((fr.magnitude - 0.80).abs() < 0.01);
        assert!((fr.phase + 1.02).abs() < 0.01);
    }

    #[test]
    fn state_only_forcing_uses_velocity_reference() {
        let lims = SaturationLimits::new(None, Some((0.0, 20.0, 10.0))).unwrap();
        let p = BalanceProblem::new(gains_default(), lims, 1.0, omega_01()).unwrap();
        let u = p.forcing();
        assert!((u.re - 2.0).abs() < 1e-15);
        assert!((u.im + 1.0 / omega_01()).abs() < 1e-12);
    }

    #[test]
    fn doubling_amplitude_scales_linear_regime() {
        let lims = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
        let settings = SolverSettings::default();
        let p1 = BalanceProblem::new(gains_default(), lims, 0.25, omega_01()).unwrap();
        let p2 = BalanceProblem::new(gains_default(), lims, 0.5, omega_01()).unwrap();
        let c1 = solve_candidates(&p1, &settings).unwrap()[0];
        let c2 = solve_candidates(&p2, &settings).unwrap()[0];
        assert!((c2.amplitude - 2.0 * c1.amplitude).abs() < 1e-9 * c2.amplitude);
        let f1 = frequency_response(&c1, &p1).unwrap();
        let f2 = frequency_response(&c2, &p2).unwrap();
        assert!((f1.magnitude - f2.magnitude).abs() < 1e-12);
        assert!((f1.phase - f2.phase).abs() < 1e-12);
    }

    #[test]
    fn no_limit_cycle_reports() {
        let lims = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
        let p = BalanceProblem::new(gains_default(), lims, 0.0, omega_01()).unwrap();
        let settings = SolverSettings { b_ini_max: Some(100.0), ..SolverSettings::default() };
        let report = check_no_limit_cycle(&p, &settings).unwrap();
        assert!(report.passed());
        assert!(report.min_denominator > 0.0);

        let truck = ControllerGains::derive(1.0, 0.4, 0.4).unwrap();
        let lims_v = SaturationLimits::new(None, Some((0.0, 20.0, 10.0))).unwrap();
        let p = BalanceProblem::new(truck, lims_v, 0.0, omega_01()).unwrap();
        let report = check_no_limit_cycle(&p, &settings).unwrap();
        assert!(report.passed());

        // Nonzero forcing is routed elsewhere.
        let p = BalanceProblem::new(truck, lims_v, 1.0, omega_01()).unwrap();
        assert!(matches!(
            check_no_limit_cycle(&p, &SolverSettings::default()),
            Err(BalanceError::NonZeroAmplitude(_))
        ));
    }

    #[test]
    fn undefined_response_at_zero_amplitude() {
        let p = BalanceProblem::new(
            gains_default(),
            SaturationLimits::unbounded(),
            0.0,
            omega_01(),
        )
        .unwrap();
        let c = OscillationCandidate {
            omega: p.omega,
            amplitude: 1.0,
            phase: 0.0,
            loop_config: LoopConfig::Linear,
            residual: 0.0,
            stability: StabilityVerdict::Unknown,
        };
        assert!(matches!(frequency_response(&c, &p), Err(BalanceError::UndefinedResponse)));
    }

    #[test]
    fn crossing_frequency_formula() {
        let truck = ControllerGains::derive(1.0, 0.4, 0.4).unwrap();
        let f = linear_crossing_frequency(&truck).unwrap();
        assert!((f - 0.19622).abs() < 1e-4);
        // Gain exceeds 1 just below, stays at or below just above.
        let below = linear_frequency_response(&truck, TAU * (f - 0.01));
        let above = linear_frequency_response(&truck, TAU * (f + 0.01));
        assert!(below.magnitude > 1.0);
        assert!(above.magnitude < 1.0);

        assert!(linear_crossing_frequency(&gains_default()).is_none());
    }
}
