//! Bracketed scalar root refinement (Brent's method: bisection, secant,
//! and inverse quadratic interpolation).

/// Refines a root of `f` inside the bracket `[a, b]`, given `fa = f(a)` and
/// `fb = f(b)` with opposite signs. Returns `(x, f(x))`, or `None` when the
/// inputs do not bracket a sign change.
///
/// `rtol` is the relative tolerance on the root location; an absolute floor
/// of a few ulps keeps tiny roots terminating.
pub fn brent<F>(mut f: F, a: f64, b: f64, fa: f64, fb: f64, rtol: f64, max_iter: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Some((a, fa));
    }
    if fb == 0.0 {
        return Some((b, fb));
    }
    if fa.signum() == fb.signum() {
        return None;
    }

    let mut xpre = a;
    let mut xcur = b;
    let mut fpre = fa;
    let mut fcur = fb;
    let mut xblk = 0.0;
    let mut fblk = 0.0;
    let mut spre = 0.0;
    let mut scur = 0.0;
    let xtol = 4.0 * f64::EPSILON;

    for _ in 0..max_iter {
        if fpre != 0.0 && fcur != 0.0 && fpre.signum() != fcur.signum() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        let delta = 0.5 * (xtol + rtol * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Some((xcur, fcur));
        }

        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // Secant step.
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // Inverse quadratic interpolation.
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
    }
    Some((xcur, fcur))
}
