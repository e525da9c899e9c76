//! Exact propagation of first/second order derivatives along orbits.
//!
//! A [`Jet2`] tracks the fibre value together with its sensitivities to
//! the initial data of an orbit segment: `dx` is the product of fibre
//! derivatives (the vertical cocycle), `dtheta`/`dtheta2` the first and
//! second derivatives with respect to the starting base point, `dbeta`
//! the parameter sensitivity. One chain-rule step per map application;
//! no finite differencing anywhere.

use alloc::vec::Vec;

use crate::error::Result;
use crate::family::Family;
use crate::torus::reduce;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    /// Fibre value after the propagated steps.
    pub x: f64,
    /// d x_n / d x_0, product of fibre derivatives along the orbit.
    pub dx: f64,
    /// d x_n / d theta_0.
    pub dtheta: f64,
    /// d^2 x_n / d theta_0^2.
    pub dtheta2: f64,
    /// d x_n / d beta.
    pub dbeta: f64,
}

impl Jet2 {
    /// The n = 0 jet: value `x0`, unit vertical derivative, no base or
    /// parameter sensitivity yet.
    pub fn identity(x0: f64) -> Self {
        Self { x: x0, dx: 1.0, dtheta: 0.0, dtheta2: 0.0, dbeta: 0.0 }
    }

    /// One chain-rule step through a map with the given partials.
    ///
    /// The base point moves rigidly with the rotation, so its derivative
    /// with respect to the starting base is exactly 1 in every step.
    #[inline]
    fn step(&self, p: &crate::family::Partials, value: f64) -> Self {
        Self {
            x: value,
            dx: p.fx * self.dx,
            dtheta: p.ftheta + p.fx * self.dtheta,
            dtheta2: p.ftheta2
                + 2.0 * p.fthetax * self.dtheta
                + p.fxx * self.dtheta * self.dtheta
                + p.fx * self.dtheta2,
            dbeta: p.fbeta + p.fx * self.dbeta,
        }
    }
}

/// Jets of `f^k` for k = 1..=n along the forward orbit of `(theta0, x0)`.
pub fn jet_forward(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta0: f64,
    x0: f64,
    n: usize,
) -> Result<Vec<Jet2>> {
    jet_forward_from(fam, omega, beta, theta0, Jet2::identity(x0), n)
}

/// Forward propagation from an arbitrary seed jet; composing segment
/// jets this way is exactly the jet of the composed map, which is what
/// the cocycle property tests.
pub fn jet_forward_from(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta0: f64,
    seed: Jet2,
    n: usize,
) -> Result<Vec<Jet2>> {
    let mut jets = Vec::with_capacity(n);
    let mut jet = seed;
    for k in 0..n {
        let base = reduce(theta0 + k as f64 * omega);
        let value = fam.eval(beta, base, jet.x)?;
        let p = fam.partials(beta, base, jet.x)?;
        jet = jet.step(&p, value);
        let (lo, hi) = fam.domain();
        if !(jet.x > lo && jet.x < hi) {
            return Err(crate::error::Error::OrbitEscape { step: k + 1, x: jet.x });
        }
        jets.push(jet);
    }
    Ok(jets)
}

/// Jets of `f^-k` for k = 1..=n along the backward orbit of
/// `(theta0, x0)`. Derivatives of the inverse fibre maps come from the
/// inverse-function recursions, composed with the same one-step rule as
/// the forward case.
pub fn jet_backward(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta0: f64,
    x0: f64,
    n: usize,
) -> Result<Vec<Jet2>> {
    jet_backward_from(fam, omega, beta, theta0, Jet2::identity(x0), n)
}

pub fn jet_backward_from(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta0: f64,
    seed: Jet2,
    n: usize,
) -> Result<Vec<Jet2>> {
    let mut jets = Vec::with_capacity(n);
    let mut jet = seed;
    for k in 0..n {
        // current base is theta0 - k omega; the preimage fibre sits over
        // theta0 - (k+1) omega
        let fibre_base = reduce(theta0 - (k + 1) as f64 * omega);
        let (u, inv) = fam.inverse_partials(beta, fibre_base, jet.x)?;
        jet = jet.step(&inv, u);
        jets.push(jet);
    }
    Ok(jets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::affine_family;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    #[test]
    fn affine_jets_are_exact() {
        // f(theta, x) = 0.5 x + 0.2 sin(2 pi theta) - beta
        let fam = affine_family(0.5, 0.0, 0.2);
        let jets = jet_forward(&fam, GOLDEN, 0.3, 0.123, 0.7, 12).unwrap();
        for (k, j) in jets.iter().enumerate() {
            let expect = libm::pow(0.5, (k + 1) as f64);
            assert!((j.dx - expect).abs() < 1e-15, "k={k}");
        }
        // second theta-derivative is driven purely by the sine forcing;
        // compare against finite differences
        let last = jets.last().unwrap();
        let h = 1e-5;
        let orbit = |t0: f64| {
            let mut x = 0.7;
            for k in 0..12 {
                let base = reduce(t0 + k as f64 * GOLDEN);
                x = fam.eval(0.3, base, x).unwrap();
            }
            x
        };
        let d2 = (orbit(0.123 + h) - 2.0 * orbit(0.123) + orbit(0.123 - h)) / (h * h);
        assert!((last.dtheta2 - d2).abs() < 1e-3 * (1.0 + d2.abs()));

        let back = jet_backward(&fam, GOLDEN, 0.3, 0.123, 0.7, 9).unwrap();
        for (k, j) in back.iter().enumerate() {
            let expect = libm::pow(2.0, (k + 1) as f64);
            assert!((j.dx - expect).abs() < 1e-9 * expect, "k={k}");
        }
    }

    #[test]
    fn backward_then_forward_is_identity_jet() {
        let fam = crate::family::Family::ArctanIntro { alpha: 100.0 };
        let (beta, theta0, x0) = (0.6, 0.271, 0.9);
        let back = jet_backward(&fam, GOLDEN, beta, theta0, x0, 1).unwrap();
        let b = back[0];
        let fwd =
            jet_forward_from(&fam, GOLDEN, beta, reduce(theta0 - GOLDEN), b, 1).unwrap();
        let j = fwd[0];
        assert!((j.x - x0).abs() < 1e-10);
        assert!((j.dx - 1.0).abs() < 1e-10);
        assert!(j.dtheta.abs() < 1e-10);
        assert!(j.dtheta2.abs() < 1e-10);
        assert!(j.dbeta.abs() < 1e-10);
    }

    #[test]
    fn forward_jets_match_finite_differences() {
        let fam = crate::family::Family::ArctanIntro { alpha: 100.0 };
        let beta = 0.53;
        let (theta0, x0) = (0.341, 0.82);
        let n = 8;
        let jets = jet_forward(&fam, GOLDEN, beta, theta0, x0, n).unwrap();
        let orbit = |t0: f64, b: f64| {
            let mut x = x0;
            for k in 0..n {
                let base = reduce(t0 + k as f64 * GOLDEN);
                x = fam.eval(b, base, x).unwrap();
            }
            x
        };
        let last = jets[n - 1];
        let h = 1e-6;
        let d1 = (orbit(theta0 + h, beta) - orbit(theta0 - h, beta)) / (2.0 * h);
        assert!(
            (d1 - last.dtheta).abs() <= 1e-4 * last.dtheta.abs().max(1e-6),
            "dtheta {} vs fd {}",
            last.dtheta,
            d1
        );
        let h2 = 1e-4;
        let d2 = (orbit(theta0 + h2, beta) - 2.0 * orbit(theta0, beta) + orbit(theta0 - h2, beta))
            / (h2 * h2);
        assert!(
            (d2 - last.dtheta2).abs() <= 1e-2 * last.dtheta2.abs().max(1e-4),
            "dtheta2 {} vs fd {}",
            last.dtheta2,
            d2
        );
        let hb = 1e-7;
        let db = (orbit(theta0, beta + hb) - orbit(theta0, beta - hb)) / (2.0 * hb);
        assert!((db - last.dbeta).abs() <= 1e-4 * last.dbeta.abs().max(1e-6));
    }
}
