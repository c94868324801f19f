//! Cross-checks between the analytic path and the time-domain loop that go
//! beyond single values: re-substitution of solved amplitudes, harmonic
//! dominance, and the geometry of real loci.

mod common;

use std::f64::consts::TAU;

use satloop_core::balance::{solve_candidates, BalanceProblem};
use satloop_core::model::{
    log_spaced_grid, ControllerGains, SaturationLimits, Scenario, SolverSettings,
    DEFAULT_FREQ_FLOOR_HZ,
};
use satloop_core::simulate::measure_steady_state;
use satloop_core::stability::{classify_candidates, open_loop_locus, select_response};

fn scenario(limits: SaturationLimits, r: f64, grid: Vec<f64>) -> Scenario {
    Scenario {
        gains: ControllerGains::derive(1.0, 2.0, 1.0).unwrap(),
        limits,
        leader_amplitude: r,
        freq_grid: grid,
        solver: SolverSettings::default(),
        standstill_distance: 0.0,
        freq_floor_hz: DEFAULT_FREQ_FLOOR_HZ,
    }
}

fn selected_amplitude(s: &Scenario, omega: f64) -> f64 {
    let p = BalanceProblem::new(s.gains, s.limits, s.leader_amplitude, omega).unwrap();
    let mut cands = solve_candidates(&p, &s.solver).unwrap();
    classify_candidates(&mut cands, &s.gains, &s.limits, &s.solver, None);
    select_response(&cands).unwrap().selected.expect("stable candidate").amplitude
}

#[test]
fn solved_acceleration_amplitude_re_substitutes() {
    // The balance predicts the first harmonic of the acceleration command;
    // away from the loop resonance (where harmonic feedback twists the
    // clip's effective phase) the integrated loop reproduces it within 1%.
    let s = scenario(SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap(), 20.0, vec![0.1]);
    for f in [0.3, 0.4, 0.5] {
        let omega = TAU * f;
        let b = selected_amplitude(&s, omega);
        let m = measure_steady_state(&s, omega, &s.solver).unwrap();
        let err = (m.accel_command.amplitude - b).abs() / b;
        assert!(err < 0.01, "f={f}: solved B={b}, simulated {}", m.accel_command.amplitude);
    }
}

#[test]
fn solved_velocity_amplitude_re_substitutes() {
    let s = scenario(
        SaturationLimits::new(None, Some((0.0, 20.0, 10.0))).unwrap(),
        40.0,
        vec![0.1],
    );
    for f in [0.4, 0.5] {
        let omega = TAU * f;
        let b = selected_amplitude(&s, omega);
        let m = measure_steady_state(&s, omega, &s.solver).unwrap();
        let err = (m.velocity.amplitude - b).abs() / b;
        assert!(err < 0.01, "f={f}: solved B={b}, simulated {}", m.velocity.amplitude);
    }
}

#[test]
fn position_response_is_first_harmonic_dominated() {
    // The double integration low-passes the clipped waveform; the residual
    // beyond the first harmonic stays small even when deeply saturated.
    let cases = [
        (SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap(), 20.0),
        (SaturationLimits::new(None, Some((0.0, 20.0, 10.0))).unwrap(), 40.0),
        (SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap(), 13.5),
    ];
    for (limits, r) in cases {
        let s = scenario(limits, r, vec![0.1]);
        for f in [0.05, 0.2, 0.5] {
            let m = measure_steady_state(&s, TAU * f, &s.solver).unwrap();
            assert!(
                m.position.residual_fraction < 0.05,
                "residual {} at f={f}, r={r}",
                m.position.residual_fraction
            );
        }
    }
}

#[test]
fn linear_loop_tracks_closed_form_across_grid() {
    // Infinite bounds: the integrator must reproduce the closed form at the
    // per-mille level over a representative chunk of the default band.
    let s = scenario(SaturationLimits::unbounded(), 1.0, log_spaced_grid(0.01, 0.5, 8));
    for &f in &s.freq_grid {
        let omega = TAU * f;
        let est = satloop_core::simulate::estimate_frequency_response(&s, omega, &s.solver).unwrap();
        let lin = satloop_core::balance::linear_frequency_response(&s.gains, omega);
        assert!(
            (est.magnitude - lin.magnitude).abs() <= 1e-3,
            "f={f}: {} vs {}",
            est.magnitude,
            lin.magnitude
        );
        assert!(common::wrapped_diff(est.phase, lin.phase).abs() <= 1e-3, "f={f}");
    }
}

#[test]
fn real_loci_are_circles() {
    // Saturated candidates of every loop type produce loci that fit a
    // circle to floating-point accuracy.
    let cases = [
        (SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap(), 20.0, 0.1),
        (SaturationLimits::new(None, Some((0.0, 20.0, 10.0))).unwrap(), 40.0, 0.15),
        (SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap(), 20.0, 0.3),
    ];
    for (limits, r, f) in cases {
        let s = scenario(limits, r, vec![f]);
        let omega = TAU * f;
        let p = BalanceProblem::new(s.gains, s.limits, r, omega).unwrap();
        let cands = solve_candidates(&p, &s.solver).unwrap();
        for c in &cands {
            let locus = open_loop_locus(c, &s.gains, &s.limits, 512).unwrap();
            let points: Vec<_> = locus.iter().map(|p| p.value).collect();
            let fit = common::fit_circle(&points);
            assert!(fit.radius > 1e-6, "degenerate locus for B={}", c.amplitude);
            assert!(
                fit.max_residual / fit.radius < 1e-8,
                "residual {:.3e} of radius {:.3e}",
                fit.max_residual,
                fit.radius
            );
        }
    }
}

#[test]
fn oracle_confirms_a_stable_candidate_exists_where_it_converges() {
    // Wherever the loop settles to a periodic response, the classifier must
    // offer at least one stable candidate.
    let s = scenario(
        SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap(),
        13.5,
        log_spaced_grid(0.05, 0.5, 6),
    );
    for &f in &s.freq_grid {
        let omega = TAU * f;
        if measure_steady_state(&s, omega, &s.solver).is_ok() {
            let p = BalanceProblem::new(s.gains, s.limits, s.leader_amplitude, omega).unwrap();
            let mut cands = solve_candidates(&p, &s.solver).unwrap();
            classify_candidates(&mut cands, &s.gains, &s.limits, &s.solver, None);
            let report = select_response(&cands).unwrap();
            assert!(report.selected.is_some(), "no stable candidate at f={f}");
        }
    }
}
