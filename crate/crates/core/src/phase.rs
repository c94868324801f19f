//! Phase bookkeeping: principal-value reduction and continuity unwrapping.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to the principal interval `(-pi, pi]`.
pub fn wrap_to_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let mut y = x % TAU;
    if y <= -PI {
        y += TAU;
    } else if y > PI {
        y -= TAU;
    }
    y
}

/// Smallest signed difference `a - b` on the circle, in `(-pi, pi]`.
pub fn circular_diff(a: f64, b: f64) -> f64 {
    wrap_to_pi(a - b)
}

/// Unwraps a phase sequence by continuity, seeded at the first element.
/// Each element is shifted by a multiple of `2 pi` so consecutive values
/// differ by at most `pi`.
pub fn unwrap_in_place(phases: &mut [f64]) {
    let mut offset = 0.0;
    let mut prev_raw: Option<f64> = None;
    for p in phases.iter_mut() {
        if let Some(prev) = prev_raw {
            let mut step = *p + offset - prev;
            while step > PI {
                offset -= TAU;
                step -= TAU;
            }
            while step <= -PI {
                offset += TAU;
                step += TAU;
            }
        }
        *p += offset;
        prev_raw = Some(*p);
    }
}

/// Unwraps a sequence with gaps; `None` entries are skipped and continuity
/// carries across them.
pub fn unwrap_options(phases: &mut [Option<f64>]) {
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for slot in phases.iter_mut() {
        let Some(p) = slot else { continue };
        if let Some(prev) = prev {
            let mut step = *p + offset - prev;
            while step > PI {
                offset -= TAU;
                step -= TAU;
            }
            while step <= -PI {
                offset += TAU;
                step += TAU;
            }
        }
        *p += offset;
        prev = Some(*p);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_principal_interval() {
        assert!((wrap_to_pi(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_to_pi(-3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_to_pi(0.25), 0.25);
        assert!((wrap_to_pi(TAU + 0.25) - 0.25).abs() < 1e-12);
        assert!(wrap_to_pi(PI) == PI);
        assert!((wrap_to_pi(-PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn unwrap_restores_a_descending_ramp() {
        // A phase that descends through -pi and wraps back up.
        let true_phase: Vec<f64> = (0..40).map(|i| -0.2 * i as f64).collect();
        let mut wrapped: Vec<f64> = true_phase.iter().map(|&p| wrap_to_pi(p)).collect();
        unwrap_in_place(&mut wrapped);
        for (u, t) in wrapped.iter().zip(&true_phase) {
            assert!((u - t).abs() < 1e-12);
        }
    }

    #[test]
    fn unwrap_carries_across_gaps() {
        let mut series = vec![
            Some(-3.0),
            None,
            Some(wrap_to_pi(-3.4)),
            Some(wrap_to_pi(-3.8)),
            None,
            Some(wrap_to_pi(-4.2)),
        ];
        unwrap_options(&mut series);
        let got: Vec<f64> = series.iter().flatten().copied().collect();
        for (g, want) in got.iter().zip([-3.0, -3.4, -3.8, -4.2]) {
            assert!((g - want).abs() < 1e-12);
        }
    }
}
