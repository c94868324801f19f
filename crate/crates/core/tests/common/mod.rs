//! Independent oracles for the integration and acceptance suites.
//!
//! Everything here deliberately avoids the library's closed forms: gains
//! come from direct Fourier projection of clipped signals, roots from plain
//! bisection, and stability references from analytic circle geometry.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

pub fn clip(x: f64, lo: f64, hi: f64) -> f64 {
    x.clamp(lo, hi)
}

/// First-harmonic complex gain of the clip by trapezoid projection over one
/// period: `(Y11 + i Y12) / B` with `samples` intervals.
pub fn df_quadrature(b: f64, lo: f64, hi: f64, samples: usize) -> Complex64 {
    let mut y11 = 0.0;
    let mut y12 = 0.0;
    for i in 0..=samples {
        let w = if i == 0 || i == samples { 0.5 } else { 1.0 };
        let theta = TAU * i as f64 / samples as f64;
        let y = clip(b * theta.sin(), lo, hi);
        y11 += w * y * theta.sin();
        y12 += w * y * theta.cos();
    }
    let scale = TAU / samples as f64 / PI;
    Complex64::new(y11 * scale / b, y12 * scale / b)
}

/// Incremental gain by brute force: a small same-frequency perturbation is
/// added to the primary sinusoid, the clipped outputs are differenced, and
/// the perturbation's first harmonic is projected out.
pub fn idf_two_sinusoid(b: f64, lo: f64, hi: f64, theta: f64, samples: usize) -> Complex64 {
    let eps = 1e-5 * b;
    let mut a1 = 0.0;
    let mut b1 = 0.0;
    for i in 0..=samples {
        let w = if i == 0 || i == samples { 0.5 } else { 1.0 };
        let wt = TAU * i as f64 / samples as f64;
        let base = clip(b * wt.sin(), lo, hi);
        let pert = clip(b * wt.sin() + eps * (wt + theta).sin(), lo, hi);
        let d = (pert - base) / eps;
        a1 += w * d * wt.sin();
        b1 += w * d * wt.cos();
    }
    let scale = 2.0 / samples as f64;
    // Output phasor relative to the perturbation input phasor e^{i theta}.
    Complex64::new(a1 * scale, b1 * scale) * Complex64::from_polar(1.0, -theta)
}

/// Plain bisection; the root reference for the balance solver.
pub fn bisection_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let mut fa = f(a);
    assert!(
        fa.signum() != f(b).signum(),
        "bisection oracle needs a sign change on [{a}, {b}]"
    );
    for _ in 0..iters {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Algebraic (Kasa) circle fit plus the worst radial residual relative to
/// the radius.
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    pub max_residual: f64,
}

#[allow(clippy::needless_range_loop)]
pub fn fit_circle(points: &[Complex64]) -> CircleFit {
    // Least squares on x^2 + y^2 + d x + e y + f = 0.
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sz, mut sxz, mut syz) = (0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p.re, p.im);
        let z = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sz += z;
        sxz += x * z;
        syz += y * z;
    }
    let mut m = [[sxx, sxy, sx, -sxz], [sxy, syy, sy, -syz], [sx, sy, n, -sz]];
    // Gaussian elimination with partial pivoting on the 3x4 system.
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut sol = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = m[row][3];
        for k in row + 1..3 {
            acc -= m[row][k] * sol[k];
        }
        sol[row] = acc / m[row][row];
    }
    let center = Complex64::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let radius = (sol[0] * sol[0] / 4.0 + sol[1] * sol[1] / 4.0 - sol[2]).max(0.0).sqrt();
    let max_residual = points
        .iter()
        .map(|p| ((p - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    CircleFit { center, radius, max_residual }
}

/// Two-case amplitude/phase reading of the balance, written the long way:
/// square roots and principal arctangents, split on the sign of
/// `1 - k1 N / omega^2`. Returns `(g, phi)` like the library's phasor form
/// (`phi` agrees modulo `2 pi`).
#[allow(clippy::too_many_arguments)]
pub fn case_formula_residual(
    k1: f64,
    k2: f64,
    k3: f64,
    omega: f64,
    r: f64,
    n_eff: f64,
    b: f64,
    velocity_referenced: bool,
) -> (f64, f64) {
    let re = 1.0 - k1 * n_eff / (omega * omega);
    let lhs_amp = (b * b * re * re + (k3 * n_eff * b / omega).powi(2)).sqrt();
    let (rhs_amp, rhs_phase) = if velocity_referenced {
        (
            ((-k1 * r / omega).powi(2) + (k2 * r).powi(2)).sqrt(),
            -(k1 / (k2 * omega)).atan(),
        )
    } else {
        (((k1 * r).powi(2) + (omega * k2 * r).powi(2)).sqrt(), (k2 * omega / k1).atan())
    };
    let lhs_shift = (-omega * k3 * n_eff / (omega * omega - k1 * n_eff)).atan();
    let phi = if re >= 0.0 {
        rhs_phase + lhs_shift
    } else {
        rhs_phase + lhs_shift - PI
    };
    (lhs_amp - rhs_amp, phi)
}

/// Smallest absolute difference of two angles on the circle.
pub fn wrapped_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % TAU;
    if d > PI {
        d -= TAU;
    } else if d <= -PI {
        d += TAU;
    }
    d
}
