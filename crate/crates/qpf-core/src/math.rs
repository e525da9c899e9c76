//! Float math routed through `libm`.
//!
//! Keeps the crate `no_std`-clean and makes every result bit-identical
//! across platforms, which the deterministic-output contract of the CLI
//! relies on.

#[inline(always)]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline(always)]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline(always)]
pub fn sincos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline(always)]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// atan for |z| >= 8 via the tail series of atan(1/z).
///
/// Max observed error vs `libm::atan` is below 1 ulp on [8, 1e6]. Used
/// only in the escape scan of the beta_c bisection, where throughput
/// matters and a sub-ulp wiggle cannot change the verdict at the
/// bisection tolerance.
#[inline(always)]
pub fn atan_big(z: f64) -> f64 {
    debug_assert!(abs(z) >= 8.0);
    let w = 1.0 / z;
    let w2 = w * w;
    let p = w * (1.0
        + w2 * (-1.0 / 3.0
            + w2 * (1.0 / 5.0
                + w2 * (-1.0 / 7.0
                    + w2 * (1.0 / 9.0
                        + w2 * (-1.0 / 11.0 + w2 * (1.0 / 13.0 + w2 * (-1.0 / 15.0))))))));
    if z > 0.0 {
        core::f64::consts::FRAC_PI_2 - p
    } else {
        -core::f64::consts::FRAC_PI_2 - p
    }
}

/// Hybrid atan: series fast path for large arguments, libm otherwise.
#[inline(always)]
pub fn atan_hybrid(z: f64) -> f64 {
    if abs(z) >= 8.0 {
        atan_big(z)
    } else {
        atan(z)
    }
}
