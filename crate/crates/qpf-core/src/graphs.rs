//! Invariant graphs by pullback/pushforward iteration, Lyapunov
//! exponents, pinching diagnostics and finite-time sink-source
//! exponents.
//!
//! Graphs are sampled on a uniform grid; every grid value is an exact
//! finite orbit of a boundary graph (no interpolation enters the
//! iteration). Each grid point is independent, so the sweeps are
//! data-parallel with deterministic, order-independent merges.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{Family, Strip};
use crate::jet;
use crate::math;
use crate::torus::reduce;

/// x below `e- - ESCAPE_EPS` marks a pullback orbit as escaped.
pub const ESCAPE_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Pullback of the upper boundary graph c+.
    Forward,
    /// Pushforward (backward orbit) of the lower boundary graph e-.
    Backward,
}

/// An invariant-graph approximation on a uniform circle grid.
#[derive(Clone, Debug)]
pub struct GraphSample {
    pub grid_size: usize,
    /// One value per grid point; NaN at escaped points.
    pub values: Vec<f64>,
    /// Sorted indices of escaped / no-preimage grid points.
    pub escaped: Vec<usize>,
    pub direction: Direction,
    pub iterations: usize,
    pub beta: f64,
    pub lyapunov: Option<f64>,
}

impl GraphSample {
    #[inline]
    pub fn theta(&self, i: usize) -> f64 {
        i as f64 / self.grid_size as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid_size).map(|i| self.theta(i))
    }

    /// A graph with any escaped point is flagged absent; bifurcation
    /// logic uses this as the no-invariant-graph signal.
    pub fn is_absent(&self) -> bool {
        !self.escaped.is_empty()
    }

    /// Max over the grid of |f(theta, phi(theta)) - phi(theta + omega)|,
    /// with phi(theta + omega) linearly interpolated from the sample.
    /// Meaningful away from beta_c, where the graph is continuous.
    pub fn invariance_residual(&self, fam: &Family, omega: f64) -> Result<f64> {
        if self.is_absent() {
            return Err(Error::AbsentGraph { escaped: self.escaped.len() });
        }
        let g = self.grid_size as f64;
        let mut worst = 0.0f64;
        for i in 0..self.grid_size {
            let image = fam.eval(self.beta, self.theta(i), self.values[i])?;
            let pos = reduce(self.theta(i) + omega) * g;
            let j = pos as usize % self.grid_size;
            let frac = pos - math::floor(pos);
            let interp = self.values[j] * (1.0 - frac)
                + self.values[(j + 1) % self.grid_size] * frac;
            let r = math::abs(image - interp);
            if r > worst {
                worst = r;
            }
        }
        Ok(worst)
    }
}

fn map_grid<T: Send, F: Fn(usize) -> T + Sync + Send>(g: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..g).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..g).map(f).collect()
    }
}

/// N-step pullback of the constant boundary graph c+: the value at grid
/// point theta is `f^N_{theta - N omega}(c+)`.
///
/// Orbit bases are always computed as `theta - j omega` from the target,
/// so samples at different N share bit-identical bases; together with
/// weakly monotone fibre evaluation this makes the pullback exactly
/// pointwise non-increasing in N.
pub fn pullback_attractor(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n: usize,
    g: usize,
) -> GraphSample {
    assert!(g >= 2, "grid must have at least two points");
    let floor = strip.e_minus - ESCAPE_EPS;
    let start = strip.c_plus;
    let values = map_grid(g, |i| {
        let theta = i as f64 / g as f64;
        let mut x = start;
        for j in (1..=n).rev() {
            let base = reduce(theta - j as f64 * omega);
            match fam.eval(beta, base, x) {
                Ok(v) => x = v,
                Err(_) => return f64::NAN,
            }
            if x < floor {
                return f64::NAN;
            }
        }
        x
    });
    let escaped: Vec<usize> =
        values.iter().enumerate().filter(|(_, v)| v.is_nan()).map(|(i, _)| i).collect();
    GraphSample {
        grid_size: g,
        values,
        escaped,
        direction: Direction::Forward,
        iterations: n,
        beta,
        lyapunov: None,
    }
}

/// N-step backward orbit of the lower boundary graph e-: the value at
/// theta is `f^-N_{theta + N omega}(e-)`. No-preimage points are flagged
/// per grid point, symmetric to pullback escape.
pub fn pushforward_repeller(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n: usize,
    g: usize,
) -> GraphSample {
    assert!(g >= 2, "grid must have at least two points");
    let start = strip.e_minus;
    let values = map_grid(g, |i| {
        let theta = i as f64 / g as f64;
        let mut x = start;
        // start at base theta + n omega; fibre bases descend to theta
        for j in (0..n).rev() {
            let fibre_base = reduce(theta + j as f64 * omega);
            match fam.inverse_at(beta, fibre_base, x) {
                Ok(v) => x = v,
                Err(_) => return f64::NAN,
            }
        }
        x
    });
    let escaped: Vec<usize> =
        values.iter().enumerate().filter(|(_, v)| v.is_nan()).map(|(i, _)| i).collect();
    GraphSample {
        grid_size: g,
        values,
        escaped,
        direction: Direction::Backward,
        iterations: n,
        beta,
        lyapunov: None,
    }
}

/// Lyapunov exponent along a graph sample: grid average of
/// `log |d_x f(theta, phi(theta))|` (equidistribution of the irrational
/// rotation justifies plain averaging). Stored into `graph.lyapunov`.
pub fn lyapunov(fam: &Family, graph: &mut GraphSample) -> Result<f64> {
    if graph.is_absent() {
        return Err(Error::AbsentGraph { escaped: graph.escaped.len() });
    }
    let mut sum = 0.0;
    for i in 0..graph.grid_size {
        let slope = fam.fibre_slope(graph.beta, graph.theta(i), graph.values[i])?;
        sum += math::ln(math::abs(slope));
    }
    let lambda = sum / graph.grid_size as f64;
    graph.lyapunov = Some(lambda);
    Ok(lambda)
}

/// Gap statistics of attractor minus repeller over a shared grid.
#[derive(Clone, Copy, Debug)]
pub struct PinchStats {
    pub min_gap: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub argmin_theta: f64,
}

pub fn pinching(attractor: &GraphSample, repeller: &GraphSample) -> Result<PinchStats> {
    if attractor.grid_size != repeller.grid_size {
        return Err(Error::GridMismatch {
            left: attractor.grid_size,
            right: repeller.grid_size,
        });
    }
    if attractor.is_absent() {
        return Err(Error::AbsentGraph { escaped: attractor.escaped.len() });
    }
    if repeller.is_absent() {
        return Err(Error::AbsentGraph { escaped: repeller.escaped.len() });
    }
    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut argmin = 0.0;
    for i in 0..attractor.grid_size {
        let gap = attractor.values[i] - repeller.values[i];
        if gap < 0.0 {
            return Err(Error::OrderingViolation { theta: attractor.theta(i), gap });
        }
        if gap < min_gap {
            min_gap = gap;
            argmin = attractor.theta(i);
        }
        if gap > max_gap {
            max_gap = gap;
        }
        sum += gap;
    }
    Ok(PinchStats {
        min_gap,
        mean_gap: sum / attractor.grid_size as f64,
        max_gap,
        argmin_theta: argmin,
    })
}

/// Finite-time vertical Lyapunov exponents at `(theta, x)`:
/// `(1/n) log |d_x f^n|` forward and `(1/n) log |d_x f^-n|` backward.
/// A sink-source candidate has both positive.
pub fn finite_time_exponents(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta: f64,
    x: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let fwd = jet::jet_forward(fam, omega, beta, theta, x, n)?;
    let back = jet::jet_backward(fam, omega, beta, theta, x, n)?;
    let nf = n as f64;
    Ok((
        math::ln(math::abs(fwd[n - 1].dx)) / nf,
        math::ln(math::abs(back[n - 1].dx)) / nf,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn intro_strip() -> Strip {
        Strip::new(-0.026, 0.026, 0.4, core::f64::consts::FRAC_PI_2, 100.0, 12.0, 0.4, 6.4)
            .unwrap()
    }

    /// Independent 1-d oracle: the attracting fixed point of
    /// x -> arctan(100 x) from above.
    fn arctan_fixed_point(alpha: f64) -> f64 {
        let mut x = core::f64::consts::FRAC_PI_2;
        for _ in 0..200 {
            x = math::atan(alpha * x);
        }
        x
    }

    #[test]
    fn zero_steps_give_boundary_graphs() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let a = pullback_attractor(&fam, &strip, GOLDEN, 0.3, 0, 16);
        assert!(a.values.iter().all(|&v| v == strip.c_plus));
        let r = pushforward_repeller(&fam, &strip, GOLDEN, 0.3, 0, 16);
        assert!(r.values.iter().all(|&v| v == strip.e_minus));
    }

    #[test]
    fn unforced_attractor_is_constant_fixed_point() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let expected = arctan_fixed_point(100.0);
        let mut a = pullback_attractor(&fam, &strip, GOLDEN, 0.0, 400, 64);
        assert!(!a.is_absent());
        for &v in &a.values {
            assert!((v - expected).abs() < 1e-12, "{v} vs {expected}");
        }
        // lambda = log(100 / (1 + (100 x*)^2))
        let lam = lyapunov(&fam, &mut a).unwrap();
        let z = 100.0 * expected;
        let expected_lam = math::ln(100.0 / (1.0 + z * z));
        assert!((lam - expected_lam).abs() < 1e-9);
        assert!(lam < -5.0 && lam > -6.0, "lambda = {lam}");

        let mut r = pushforward_repeller(&fam, &strip, GOLDEN, 0.0, 400, 64);
        for &v in &r.values {
            assert!(v.abs() < 1e-12, "repeller should sit on the zero line, got {v}");
        }
        let lam_r = lyapunov(&fam, &mut r).unwrap();
        assert!((lam_r - math::ln(100.0)).abs() < 1e-10);
        assert_eq!(r.lyapunov, Some(lam_r));

        let pinch = pinching(&a, &r).unwrap();
        assert!((pinch.min_gap - expected).abs() < 1e-10);
        assert!((pinch.max_gap - expected).abs() < 1e-10);
    }

    #[test]
    fn affine_lyapunov_is_log_half() {
        // f = x/2 + 0.2 sin(2 pi theta): lambda = -log 2 exactly
        let fam = crate::family::affine_family(0.5, 0.0, 0.2);
        let strip = Strip::new(-4.0, -0.5, 0.0, 4.0, 8.0, 2.0, 1.0, 10.0).unwrap();
        let mut a = pullback_attractor(&fam, &strip, GOLDEN, 0.0, 200, 128);
        assert!(!a.is_absent());
        let lam = lyapunov(&fam, &mut a).unwrap();
        assert!((lam + math::ln(2.0)).abs() < 1e-12);
    }

    #[test]
    fn pullback_monotone_in_n_exactly() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let beta = 0.7;
        let mut prev = pullback_attractor(&fam, &strip, GOLDEN, beta, 5, 256);
        for n in [10usize, 20, 50, 120] {
            let cur = pullback_attractor(&fam, &strip, GOLDEN, beta, n, 256);
            for i in 0..256 {
                assert!(
                    cur.values[i] <= prev.values[i],
                    "pullback not monotone at i={i}, n={n}"
                );
            }
            prev = cur;
        }
    }

    #[test]
    fn pushforward_monotone_in_n_exactly() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let beta = 0.7;
        let mut prev = pushforward_repeller(&fam, &strip, GOLDEN, beta, 5, 256);
        for n in [10usize, 20, 50, 120] {
            let cur = pushforward_repeller(&fam, &strip, GOLDEN, beta, n, 256);
            for i in 0..256 {
                assert!(
                    cur.values[i] >= prev.values[i],
                    "pushforward not monotone at i={i}, n={n}"
                );
            }
            prev = cur;
        }
    }

    #[test]
    fn escape_above_beta_plus() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let a = pullback_attractor(&fam, &strip, GOLDEN, 0.95, 200, 64);
        assert!(a.is_absent());
        assert!(a.values[a.escaped[0]].is_nan());
    }

    #[test]
    fn finite_time_exponents_at_fixed_points() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let (fwd, back) = finite_time_exponents(&fam, GOLDEN, 0.0, 0.37, 0.0, 24).unwrap();
        assert!((fwd - math::ln(100.0)).abs() < 1e-10);
        assert!((back + math::ln(100.0)).abs() < 1e-10);

        // the attractor is backward-unstable: rounding in the preimage
        // amplifies by e^5.5 per step, so keep the horizon short
        let x_star = arctan_fixed_point(100.0);
        let (fwd, back) = finite_time_exponents(&fam, GOLDEN, 0.0, 0.37, x_star, 4).unwrap();
        assert!(fwd < -5.0);
        assert!(back > 5.0);
    }

    #[test]
    fn invariance_residual_small_for_converged_graph() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let a = pullback_attractor(&fam, &strip, GOLDEN, 0.7, 2000, 4096);
        let res = a.invariance_residual(&fam, GOLDEN).unwrap();
        // tolerance scales with grid spacing times the graph's slope scale
        assert!(res < 1e-2, "residual {res}");
    }

    #[test]
    fn pinching_detects_ordering_violation() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let a = pullback_attractor(&fam, &strip, GOLDEN, 0.0, 50, 32);
        let r = pushforward_repeller(&fam, &strip, GOLDEN, 0.0, 50, 32);
        // swapped arguments must fail the ordering check
        assert!(matches!(pinching(&r, &a), Err(Error::OrderingViolation { .. })));
        let mismatched = pullback_attractor(&fam, &strip, GOLDEN, 0.0, 50, 64);
        assert!(matches!(pinching(&mismatched, &r), Err(Error::GridMismatch { .. })));
    }
}
