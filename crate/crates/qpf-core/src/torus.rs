//! Circle geometry: distances, arcs and Diophantine margin estimates.
//!
//! Points on the circle T = R/Z are represented in [0, 1). Arcs are
//! stored as center/half-width so that translation by omega costs one
//! floating rounding.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Reduce a real number to its representative in [0, 1).
#[inline(always)]
pub fn reduce(x: f64) -> f64 {
    let r = x - math::floor(x);
    // fl(x - floor(x)) can round up to exactly 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Circle distance: min over integer lifts of |a - b|, in [0, 0.5].
/// Computed from the reduced representatives so that it is exactly
/// symmetric in its arguments.
#[inline(always)]
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = math::abs(reduce(a) - reduce(b));
    if d > 0.5 {
        1.0 - d
    } else {
        d
    }
}

/// A closed arc on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    center: f64,
    half_width: f64,
}

impl Arc {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&half_width) {
            return Err(Error::InvalidRotation(format!(
                "arc half-width {half_width} outside [0, 0.5]"
            )));
        }
        Ok(Self { center: reduce(center), half_width })
    }

    /// Arc running counter-clockwise from `lo` to `hi`.
    pub fn from_endpoints(lo: f64, hi: f64) -> Result<Self> {
        let width = reduce(hi - lo);
        Self::new(lo + 0.5 * width, 0.5 * width)
    }

    /// Degenerate single-point arc.
    pub fn point(theta: f64) -> Self {
        Self { center: reduce(theta), half_width: 0.0 }
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// |Arc| = 2 * half_width.
    #[inline]
    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Left endpoint (counter-clockwise start).
    #[inline]
    pub fn lo(&self) -> f64 {
        reduce(self.center - self.half_width)
    }

    /// Right endpoint.
    #[inline]
    pub fn hi(&self) -> f64 {
        reduce(self.center + self.half_width)
    }

    #[inline]
    pub fn contains(&self, theta: f64) -> bool {
        circle_dist(theta, self.center) <= self.half_width
    }

    /// Exact containment of `other` in `self`.
    #[inline]
    pub fn contains_arc(&self, other: &Arc) -> bool {
        circle_dist(other.center, self.center) + other.half_width <= self.half_width
    }

    #[inline]
    pub fn translate(&self, delta: f64) -> Arc {
        Arc { center: reduce(self.center + delta), half_width: self.half_width }
    }

    #[inline]
    pub fn intersects(&self, other: &Arc) -> bool {
        circle_dist(self.center, other.center) <= self.half_width + other.half_width
    }

    /// Uniform sample of `n` points covering the arc (endpoints included).
    pub fn sample(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "need at least two sample points");
        let lo = self.center - self.half_width;
        let step = self.width() / (n - 1) as f64;
        (0..n).map(|i| reduce(lo + i as f64 * step)).collect()
    }
}

/// inf of the circle distance over two arcs; 0 iff they intersect.
#[inline]
pub fn arc_gap(a: &Arc, b: &Arc) -> f64 {
    let d = circle_dist(a.center, b.center) - a.half_width - b.half_width;
    if d < 0.0 {
        0.0
    } else {
        d
    }
}

/// Smallest gap from `arc` to any member of `union`.
pub fn gap_to_union(arc: &Arc, union: &[Arc]) -> f64 {
    union.iter().map(|b| arc_gap(arc, b)).fold(f64::INFINITY, f64::min)
}

/// Rotation number with Diophantine parameters and a finite check horizon.
///
/// True Diophantineness is not decidable numerically; `check_horizon`
/// bounds the finite certificate: d(k omega, 0) >= dio_c * k^(-dio_eta)
/// for 1 <= k <= check_horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationSpec {
    pub omega: f64,
    pub dio_c: f64,
    pub dio_eta: f64,
    pub check_horizon: u64,
}

/// Tolerance below which a multiple of omega is considered to land on 0,
/// i.e. omega fails the irrationality check.
pub const IRRATIONALITY_TOL: f64 = 1e-12;

impl RotationSpec {
    pub fn new(omega: f64, dio_c: f64, dio_eta: f64, check_horizon: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&omega) {
            return Err(Error::InvalidRotation(format!("omega = {omega} outside [0, 1)")));
        }
        if dio_c <= 0.0 || dio_eta <= 0.0 {
            return Err(Error::InvalidRotation(format!(
                "Diophantine parameters must be positive (C = {dio_c}, eta = {dio_eta})"
            )));
        }
        if check_horizon == 0 {
            return Err(Error::InvalidRotation("check horizon must be >= 1".into()));
        }
        Ok(Self { omega, dio_c, dio_eta, check_horizon })
    }

    /// Golden mean rotation (sqrt(5) - 1) / 2 with eta = 1.
    ///
    /// The margin scan gives min_k d(k omega, 0) * k = 1 - omega
    /// ~ 0.3819, attained at k = 1, so dio_c = 0.38 is certified for
    /// every horizon.
    pub fn golden(check_horizon: u64) -> Self {
        Self {
            omega: (math::sqrt(5.0) - 1.0) / 2.0,
            dio_c: 0.38,
            dio_eta: 1.0,
            check_horizon,
        }
    }

    /// min over 1 <= k <= check_horizon of d(k omega, 0) * k^eta.
    ///
    /// The Diophantine invariant holds iff the result is >= dio_c.
    pub fn diophantine_margin(&self) -> f64 {
        self.margin_up_to(self.check_horizon)
    }

    /// Margin over a caller-chosen horizon (used by property tests).
    pub fn margin_up_to(&self, horizon: u64) -> f64 {
        let mut margin = f64::INFINITY;
        for k in 1..=horizon {
            let kf = k as f64;
            let d = circle_dist(reduce(kf * self.omega), 0.0);
            let m = d * math::powf(kf, self.dio_eta);
            if m < margin {
                margin = m;
            }
        }
        margin
    }

    /// Checks both invariants: irrationality to working precision and
    /// the finite Diophantine certificate.
    pub fn validate(&self) -> Result<()> {
        let mut min_dist = f64::INFINITY;
        for k in 1..=self.check_horizon {
            let d = circle_dist(reduce(k as f64 * self.omega), 0.0);
            if d < min_dist {
                min_dist = d;
            }
        }
        if min_dist <= IRRATIONALITY_TOL {
            return Err(Error::InvalidRotation(format!(
                "omega = {} is rational to working precision (d(k omega, 0) = {min_dist:.3e})",
                self.omega
            )));
        }
        let margin = self.diophantine_margin();
        if margin < self.dio_c {
            return Err(Error::InvalidRotation(format!(
                "Diophantine margin {margin:.6} below C = {} up to horizon {}",
                self.dio_c, self.check_horizon
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_dist_basic() {
        assert_eq!(circle_dist(0.25, 0.75), 0.5);
        assert!((circle_dist(0.9, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(0.3, 0.3), 0.0);
        assert_eq!(circle_dist(0.0, 1.0 - 1e-9), circle_dist(1.0 - 1e-9, 0.0));
    }

    #[test]
    fn reduce_handles_negatives() {
        assert!((reduce(-0.25) - 0.75).abs() < 1e-15);
        assert_eq!(reduce(3.0), 0.0);
        let r = reduce(-1e-18);
        assert!((0.0..1.0).contains(&r));
    }

    #[test]
    fn golden_margin_single_term() {
        let rot = RotationSpec::golden(1);
        let expected = 1.0 - rot.omega;
        assert!((rot.diophantine_margin() - expected).abs() < 1e-15);
    }

    #[test]
    fn golden_margin_horizon_1e4() {
        let rot = RotationSpec::golden(10_000);
        let m = rot.diophantine_margin();
        assert!((0.38..=0.45).contains(&m), "margin {m}");
        rot.validate().unwrap();
    }

    #[test]
    fn rational_rotation_fails() {
        let rot = RotationSpec::new(0.5, 1.0, 1.0, 2).unwrap();
        assert_eq!(rot.diophantine_margin(), 0.0);
        assert!(rot.validate().is_err());
    }

    #[test]
    fn margin_non_increasing_in_horizon() {
        let rot = RotationSpec::golden(1);
        let mut prev = f64::INFINITY;
        for h in [1u64, 10, 100, 1000, 10_000] {
            let m = rot.margin_up_to(h);
            assert!(m <= prev + 1e-15);
            prev = m;
        }
        // golden mean is badly approximable: bounded below by 1/sqrt(5) - eps
        assert!(prev > 1.0 / math::sqrt(5.0) - 0.07);
    }

    #[test]
    fn arc_gap_examples() {
        let a = Arc::from_endpoints(0.1, 0.2).unwrap();
        let b = Arc::from_endpoints(0.4, 0.5).unwrap();
        assert!((arc_gap(&a, &b) - 0.2).abs() < 1e-15);

        let c = Arc::from_endpoints(0.15, 0.45).unwrap();
        assert_eq!(arc_gap(&a, &c), 0.0);
        assert!(a.intersects(&c));

        // arc vs its translate by k*omega, golden mean, k = 1, width 0.01
        let rot = RotationSpec::golden(1);
        let arc = Arc::new(0.0, 0.005).unwrap();
        let gap = arc_gap(&arc, &arc.translate(rot.omega));
        assert!((gap - (1.0 - rot.omega - 0.01)).abs() < 1e-12, "gap {gap}");
    }

    #[test]
    fn arc_wraparound() {
        let a = Arc::from_endpoints(0.95, 0.05).unwrap();
        assert!(a.contains(0.0));
        assert!(a.contains(0.97));
        assert!(!a.contains(0.5));
        assert!((a.width() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn arc_containment_is_exact() {
        let outer = Arc::new(0.3, 0.2).unwrap();
        let inner = Arc::new(0.35, 0.1).unwrap();
        assert!(outer.contains_arc(&inner));
        assert!(!inner.contains_arc(&outer));
        assert!(outer.contains_arc(&outer));
    }
}
