//! Frequency-response analysis of a saturated car-following loop.
//!
//! An automated follower that tracks a sinusoidally oscillating leader
//! through a linear spacing controller, with hard limits on commanded
//! acceleration and on speed, responds nonlinearly once a limit is reached.
//! This crate computes that response analytically and checks itself against
//! a built-in time-domain integrator:
//!
//! - [`describing`]: first-harmonic (describing-function) gains of the
//!   saturation elements, their amplitude derivatives, and the
//!   incremental-input gains seen by small perturbations.
//! - [`balance`]: harmonic balance of the closed loop; solves for
//!   oscillation candidates at each frequency, evaluates their closed-loop
//!   magnitude and phase, and degenerates exactly to the linear closed form
//!   when no limit is reached.
//! - [`stability`]: Nyquist-style winding test on the incremental open
//!   loop, classifying each candidate as stable or unstable and selecting
//!   the physical response.
//! - [`simulate`]: fixed-step integration of the clipped loop plus
//!   first-harmonic extraction, the reference every analytic result is
//!   validated against.
//! - [`analysis`]: frequency sweeps, amplitude-ratio heatmaps, and string
//!   stability verdicts built from the pieces above.
//! - [`io`]: scenario files, CSV/JSON result emission, and locus export.
//!
//! # Example
//!
//! ```
//! use satloop_core::model::{ControllerGains, SaturationLimits, SolverSettings};
//! use satloop_core::balance::{solve_candidates, frequency_response, BalanceProblem};
//! use satloop_core::stability::{classify_candidates, select_response};
//!
//! let gains = ControllerGains::derive(1.0, 2.0, 1.0).unwrap();
//! let limits = SaturationLimits::new(Some((-5.0, 5.0)), None).unwrap();
//! let settings = SolverSettings::default();
//! let omega = std::f64::consts::TAU * 0.1;
//!
//! let problem = BalanceProblem::new(gains, limits, 20.0, omega).unwrap();
//! let mut candidates = solve_candidates(&problem, &settings).unwrap();
//! classify_candidates(&mut candidates, &gains, &limits, &settings, None);
//! let selected = select_response(&candidates).unwrap().selected.unwrap();
//! let response = frequency_response(&selected, &problem).unwrap();
//! assert!(response.magnitude < 1.0);
//! ```

pub mod analysis;
pub mod balance;
pub mod describing;
pub mod io;
pub mod model;
pub mod phase;
pub mod rootfind;
pub mod simulate;
pub mod stability;

pub use balance::{
    FrequencyResponsePoint, OscillationCandidate, ResponseMethod, StabilityVerdict,
};
pub use model::{ControllerGains, LoopConfig, SaturationLimits, Scenario, SolverSettings};
