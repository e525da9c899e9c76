//! Small quadrature and root-finding helpers.

use crate::error::{Error, Result};
use crate::math;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_rec(f, a, b, fa, fm, fb, simpson_est(a, b, fa, fm, fb), tol, 48)
}

#[inline]
fn simpson_est(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_est(a, m, fa, flm, fm);
    let right = simpson_est(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || math::abs(delta) <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Bisection to |b - a| <= xtol on a bracketing pair. `f(a)` and `f(b)`
/// must have opposite signs (zero counts for either side).
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NotFound("bisection bracket has no sign change"));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Monotone inverse: solve f(x) = y for increasing f on [lo, hi] by
/// safeguarded Newton (bisection fallback keeps the bracket valid).
pub fn invert_monotone<F, D>(f: &F, df: &D, y: f64, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if f(lo) - y > 0.0 || f(hi) - y < 0.0 {
        return Err(Error::NotFound("target outside monotone bracket"));
    }
    let mut a = lo;
    let mut b = hi;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x) - y;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut next = if d > 0.0 { x - fx / d } else { f64::NAN };
        if !next.is_finite() || next <= a || next >= b {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= xtol || b - a <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Golden-section minimisation of a unimodal function on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_atan() {
        // integral of 1/(1+z^2) = atan
        for &u in &[0.1, 0.5, 1.0, 2.0] {
            let v = adaptive_simpson(&|z: f64| 1.0 / (1.0 + z * z), 0.0, u, 1e-14);
            assert!((v - math::atan(u)).abs() < 1e-12, "u={u}");
        }
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(&|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - math::sqrt(2.0)).abs() < 1e-12);
    }

    #[test]
    fn invert_monotone_roundtrip() {
        let f = |x: f64| math::atan(100.0 * x);
        let df = |x: f64| 100.0 / (1.0 + (100.0 * x) * (100.0 * x));
        let x = invert_monotone(&f, &df, 1.2, -2.0, 2.0, 1e-15).unwrap();
        assert!((f(x) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn golden_min_quadratic() {
        let (x, v) = golden_min(&|x: f64| (x - 0.3) * (x - 0.3) + 1.0, -1.0, 1.0, 1e-10);
        // localisation saturates at sqrt(machine eps) for a flat quadratic
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
