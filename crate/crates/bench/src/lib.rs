//! Shared fixtures for the benchmark suite.

use satloop_core::model::{
    log_spaced_grid, ControllerGains, SaturationLimits, Scenario, SolverSettings,
    DEFAULT_FREQ_FLOOR_HZ,
};

/// Passenger-car scenario with both saturations active and the leader
/// amplitude well past the acceleration bound.
pub fn saturated_scenario() -> Scenario {
    Scenario {
        gains: ControllerGains::derive(1.0, 2.0, 1.0).unwrap(),
        limits: SaturationLimits::new(Some((-5.0, 5.0)), Some((0.0, 20.0, 10.0))).unwrap(),
        leader_amplitude: 20.0,
        freq_grid: log_spaced_grid(0.02, 0.5, 25),
        solver: SolverSettings::default(),
        standstill_distance: 2.0,
        freq_floor_hz: DEFAULT_FREQ_FLOOR_HZ,
    }
}
