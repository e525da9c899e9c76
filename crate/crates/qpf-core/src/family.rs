//! Parametrised qpf families: evaluation, inverses, partial derivatives
//! and the assumption suite.
//!
//! Every family is a skew product `(theta, x) -> (theta + omega,
//! f_beta(theta, x))` with strictly increasing fibre maps. The built-in
//! families carry hand-coded closed-form partials; `Custom` families
//! supply expressions for the map and all six partials, which are
//! validated against finite differences at load time.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::math;
use crate::quad;
use crate::torus::reduce;

const TAU: f64 = core::f64::consts::TAU;
const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;
const FRAC_PI_4: f64 = core::f64::consts::FRAC_PI_4;

/// First and second order partial derivatives of a fibre map at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Partials {
    pub fx: f64,
    pub fxx: f64,
    pub ftheta: f64,
    pub ftheta2: f64,
    pub fthetax: f64,
    pub fbeta: f64,
}

/// Expression-backed family with caller-supplied partials.
#[derive(Clone, Debug)]
pub struct CustomFamily {
    pub f: Expr,
    pub fx: Expr,
    pub fxx: Expr,
    pub ftheta: Expr,
    pub ftheta2: Expr,
    pub fthetax: Expr,
    pub fbeta: Expr,
    /// Fibre domain; also the bracket for the monotone inverse.
    pub domain: (f64, f64),
}

#[derive(Clone, Debug)]
pub enum Family {
    /// `arctan(alpha x) - beta (1 + cos 2 pi theta)` (the Figure-1 scaling).
    ArctanIntro { alpha: f64 },
    /// `arctan(alpha x) - beta (pi/4) (1 + cos 2 pi theta)`.
    ArctanQuarterPi { alpha: f64 },
    /// `h_q(alpha x) - beta (h_q(inf)/2) (1 + cos 2 pi theta)` with
    /// `h_q(x) = sgn(x) * integral_0^|x| (1 + z^q)^-1 dz`, q > 1.
    HqDrive { alpha: f64, q: f64 },
    /// `h_q(alpha x) - 2 beta - (1 + sin 2 pi theta)/2`.
    SineDrive { alpha: f64, q: f64 },
    /// Harper map `x -> arctan(-1 / (tan x - E + coupling cos 2 pi theta))`
    /// with `E = e0 - span * beta`. Exploration only: its fibre space is
    /// an angle interval and hypothesis certification is out of scope.
    Harper { e0: f64, coupling: f64, span: f64 },
    Custom(CustomFamily),
}

impl Family {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Family::ArctanIntro { .. } => "arctan_intro",
            Family::ArctanQuarterPi { .. } => "arctan_quarter_pi",
            Family::HqDrive { .. } => "hq_drive",
            Family::SineDrive { .. } => "sine_drive",
            Family::Harper { .. } => "harper",
            Family::Custom(_) => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Family::ArctanIntro { alpha } | Family::ArctanQuarterPi { alpha } => {
                if *alpha <= 0.0 {
                    return Err(Error::InvalidFamily(format!("alpha = {alpha} must be > 0")));
                }
            }
            Family::HqDrive { alpha, q } | Family::SineDrive { alpha, q } => {
                if *alpha <= 0.0 {
                    return Err(Error::InvalidFamily(format!("alpha = {alpha} must be > 0")));
                }
                if *q <= 1.0 {
                    return Err(Error::InvalidFamily(format!("q = {q} must be > 1")));
                }
            }
            Family::Harper { coupling, span, .. } => {
                if *coupling < 0.0 || *span <= 0.0 {
                    return Err(Error::InvalidFamily("harper needs coupling >= 0, span > 0".into()));
                }
            }
            Family::Custom(c) => {
                if !(c.domain.0 < c.domain.1) {
                    return Err(Error::InvalidFamily("custom domain must be a proper interval".into()));
                }
            }
        }
        Ok(())
    }

    /// Natural fibre domain. Orbits leaving it raise domain errors.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Family::Harper { .. } => (-FRAC_PI_2, FRAC_PI_2),
            Family::Custom(c) => c.domain,
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Fibre map value `f_beta(theta, x)`. The full skew product sends
    /// `(theta, x)` to `(theta + omega, eval(beta, theta, x))`.
    pub fn eval(&self, beta: f64, theta: f64, x: f64) -> Result<f64> {
        match self {
            Family::ArctanIntro { alpha } => {
                Ok(math::atan(alpha * x) - beta * (1.0 + math::cos(TAU * theta)))
            }
            Family::ArctanQuarterPi { alpha } => {
                Ok(math::atan(alpha * x) - beta * FRAC_PI_4 * (1.0 + math::cos(TAU * theta)))
            }
            Family::HqDrive { alpha, q } => {
                let m = 0.5 * hq::h_inf(*q);
                Ok(hq::h(*q, alpha * x) - beta * m * (1.0 + math::cos(TAU * theta)))
            }
            Family::SineDrive { alpha, q } => {
                Ok(hq::h(*q, alpha * x) - 2.0 * beta - 0.5 * (1.0 + math::sin(TAU * theta)))
            }
            Family::Harper { e0, coupling, span } => {
                let d = harper_denom(*e0, *coupling, *span, beta, theta, x)?;
                Ok(math::atan(-1.0 / d))
            }
            Family::Custom(c) => {
                if x < c.domain.0 || x > c.domain.1 {
                    return Err(Error::DomainViolation { x, reason: "outside custom domain" });
                }
                Ok(c.f.eval(theta, x, beta))
            }
        }
    }

    /// `d/dx f_beta(theta, x)`; strictly positive on the strip for
    /// monotone families.
    pub fn fibre_slope(&self, beta: f64, theta: f64, x: f64) -> Result<f64> {
        match self {
            Family::ArctanIntro { alpha } | Family::ArctanQuarterPi { alpha } => {
                let z = alpha * x;
                Ok(alpha / (1.0 + z * z))
            }
            Family::HqDrive { alpha, q } | Family::SineDrive { alpha, q } => {
                Ok(alpha * hq::h_prime(*q, alpha * x))
            }
            Family::Harper { e0, coupling, span } => {
                let d = harper_denom(*e0, *coupling, *span, beta, theta, x)?;
                let t = math::tan(x);
                Ok((1.0 + t * t) / (d * d + 1.0))
            }
            Family::Custom(c) => Ok(c.fx.eval(theta, x, beta)),
        }
    }

    /// All first/second partials at one point.
    pub fn partials(&self, beta: f64, theta: f64, x: f64) -> Result<Partials> {
        match self {
            Family::ArctanIntro { alpha } => {
                let (sn, cs) = math::sincos(TAU * theta);
                let z = alpha * x;
                let den = 1.0 + z * z;
                Ok(Partials {
                    fx: alpha / den,
                    fxx: -2.0 * alpha * alpha * alpha * x / (den * den),
                    ftheta: TAU * beta * sn,
                    ftheta2: TAU * TAU * beta * cs,
                    fthetax: 0.0,
                    fbeta: -(1.0 + cs),
                })
            }
            Family::ArctanQuarterPi { alpha } => {
                let (sn, cs) = math::sincos(TAU * theta);
                let z = alpha * x;
                let den = 1.0 + z * z;
                Ok(Partials {
                    fx: alpha / den,
                    fxx: -2.0 * alpha * alpha * alpha * x / (den * den),
                    ftheta: FRAC_PI_4 * TAU * beta * sn,
                    ftheta2: FRAC_PI_4 * TAU * TAU * beta * cs,
                    fthetax: 0.0,
                    fbeta: -FRAC_PI_4 * (1.0 + cs),
                })
            }
            Family::HqDrive { alpha, q } => {
                let (sn, cs) = math::sincos(TAU * theta);
                let m = 0.5 * hq::h_inf(*q);
                let u = alpha * x;
                Ok(Partials {
                    fx: alpha * hq::h_prime(*q, u),
                    fxx: alpha * alpha * hq::h_second(*q, u),
                    ftheta: m * TAU * beta * sn,
                    ftheta2: m * TAU * TAU * beta * cs,
                    fthetax: 0.0,
                    fbeta: -m * (1.0 + cs),
                })
            }
            Family::SineDrive { alpha, q } => {
                let (sn, cs) = math::sincos(TAU * theta);
                let u = alpha * x;
                Ok(Partials {
                    fx: alpha * hq::h_prime(*q, u),
                    fxx: alpha * alpha * hq::h_second(*q, u),
                    ftheta: -0.5 * TAU * cs,
                    ftheta2: 0.5 * TAU * TAU * sn,
                    fthetax: 0.0,
                    fbeta: -2.0,
                })
            }
            Family::Harper { e0, coupling, span } => {
                let d = harper_denom(*e0, *coupling, *span, beta, theta, x)?;
                let (sn, cs) = math::sincos(TAU * theta);
                let t = math::tan(x);
                let sec2 = 1.0 + t * t;
                let den = d * d + 1.0;
                let vp = -TAU * sn * coupling; // d/dtheta (coupling cos 2 pi theta)
                let vpp = -TAU * TAU * cs * coupling;
                Ok(Partials {
                    fx: sec2 / den,
                    fxx: 2.0 * sec2 * (t * den - d * sec2) / (den * den),
                    ftheta: vp / den,
                    ftheta2: vpp / den - 2.0 * d * vp * vp / (den * den),
                    fthetax: -2.0 * d * vp * sec2 / (den * den),
                    fbeta: span / den,
                })
            }
            Family::Custom(c) => Ok(Partials {
                fx: c.fx.eval(theta, x, beta),
                fxx: c.fxx.eval(theta, x, beta),
                ftheta: c.ftheta.eval(theta, x, beta),
                ftheta2: c.ftheta2.eval(theta, x, beta),
                fthetax: c.fthetax.eval(theta, x, beta),
                fbeta: c.fbeta.eval(theta, x, beta),
            }),
        }
    }

    /// Preimage under the fibre map over `base`: the `x` with
    /// `eval(beta, base, x) = y`. Closed form for the built-ins,
    /// bisection-then-Newton on the domain bracket for `Custom`.
    pub fn inverse_at(&self, beta: f64, base: f64, y: f64) -> Result<f64> {
        match self {
            Family::ArctanIntro { alpha } => {
                let v = y + beta * (1.0 + math::cos(TAU * base));
                if v <= -FRAC_PI_2 || v >= FRAC_PI_2 {
                    return Err(Error::NoPreimage { base, y });
                }
                Ok(math::tan(v) / alpha)
            }
            Family::ArctanQuarterPi { alpha } => {
                let v = y + beta * FRAC_PI_4 * (1.0 + math::cos(TAU * base));
                if v <= -FRAC_PI_2 || v >= FRAC_PI_2 {
                    return Err(Error::NoPreimage { base, y });
                }
                Ok(math::tan(v) / alpha)
            }
            Family::HqDrive { alpha, q } => {
                let m = 0.5 * hq::h_inf(*q);
                let v = y + beta * m * (1.0 + math::cos(TAU * base));
                let u = hq::h_inverse(*q, v).ok_or(Error::NoPreimage { base, y })?;
                Ok(u / alpha)
            }
            Family::SineDrive { alpha, q } => {
                let v = y + 2.0 * beta + 0.5 * (1.0 + math::sin(TAU * base));
                let u = hq::h_inverse(*q, v).ok_or(Error::NoPreimage { base, y })?;
                Ok(u / alpha)
            }
            Family::Harper { e0, coupling, span } => {
                // y = atan(-1/D) => D = -cot(y); then tan x = D + E - coupling V
                if y <= -FRAC_PI_2 || y >= FRAC_PI_2 || y == 0.0 {
                    return Err(Error::NoPreimage { base, y });
                }
                let d = -math::cos(y) / math::sin(y);
                let e = e0 - span * beta;
                let t = d + e - coupling * math::cos(TAU * base);
                Ok(math::atan(t))
            }
            Family::Custom(c) => {
                let (lo, hi) = c.domain;
                let f = |x: f64| c.f.eval(base, x, beta);
                let df = |x: f64| c.fx.eval(base, x, beta);
                let xtol = 1e-14 * (hi - lo).min(1e6);
                quad::invert_monotone(&f, &df, y, lo, hi, xtol)
                    .map_err(|_| Error::NoPreimage { base, y })
            }
        }
    }

    /// Spec-style inverse: `x` with `eval(beta, theta - omega, x) = y`,
    /// i.e. the fibre map of `f^-1` over `theta`.
    pub fn inverse_eval(&self, beta: f64, theta: f64, omega: f64, y: f64) -> Result<f64> {
        self.inverse_at(beta, reduce(theta - omega), y)
    }

    /// Partials of the inverse fibre map over `base + omega` evaluated at
    /// `y`, derived from the forward partials at the preimage.
    pub fn inverse_partials(&self, beta: f64, base: f64, y: f64) -> Result<(f64, Partials)> {
        let u = self.inverse_at(beta, base, y)?;
        let p = self.partials(beta, base, u)?;
        if p.fx <= 0.0 {
            return Err(Error::DomainViolation { x: u, reason: "non-monotone fibre map" });
        }
        let gx = 1.0 / p.fx;
        let gxx = -p.fxx * gx * gx * gx;
        let gthetax = -p.fthetax * gx * gx - p.ftheta * gxx;
        let gtheta = -p.ftheta * gx;
        let gtheta2 = -p.ftheta2 * gx - 2.0 * p.ftheta * gthetax - p.ftheta * p.ftheta * gxx;
        let gbeta = -p.fbeta * gx;
        Ok((
            u,
            Partials {
                fx: gx,
                fxx: gxx,
                ftheta: gtheta,
                ftheta2: gtheta2,
                fthetax: gthetax,
                fbeta: gbeta,
            },
        ))
    }
}

fn harper_denom(e0: f64, coupling: f64, span: f64, beta: f64, theta: f64, x: f64) -> Result<f64> {
    if x <= -FRAC_PI_2 || x >= FRAC_PI_2 {
        return Err(Error::DomainViolation { x, reason: "harper fibre angle outside (-pi/2, pi/2)" });
    }
    let e = e0 - span * beta;
    let d = math::tan(x) - e + coupling * math::cos(TAU * theta);
    if d == 0.0 {
        return Err(Error::DomainViolation { x, reason: "harper denominator vanishes" });
    }
    Ok(d)
}

/// `h_q` helpers: `h_q(x) = sgn(x) * integral_0^|x| (1 + z^q)^-1 dz`.
pub mod hq {
    use super::*;

    /// `h_q(inf) = pi / (q sin(pi/q))` for q > 1.
    pub fn h_inf(q: f64) -> f64 {
        core::f64::consts::PI / (q * math::sin(core::f64::consts::PI / q))
    }

    pub fn h_prime(q: f64, u: f64) -> f64 {
        1.0 / (1.0 + math::powf(math::abs(u), q))
    }

    pub fn h_second(q: f64, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let a = math::abs(u);
        let aq = math::powf(a, q);
        let den = 1.0 + aq;
        let sign = if u > 0.0 { 1.0 } else { -1.0 };
        -sign * q * aq / (a * den * den)
    }

    pub fn h(q: f64, u: f64) -> f64 {
        let a = math::abs(u);
        let v = if a <= 2.0 {
            quad::adaptive_simpson(&|z: f64| 1.0 / (1.0 + math::powf(z, q)), 0.0, a, 1e-14)
        } else {
            h_inf(q) - tail(q, a)
        };
        if u >= 0.0 {
            v
        } else {
            -v
        }
    }

    /// integral_u^inf (1 + z^q)^-1 dz as an alternating series, u > 1.
    fn tail(q: f64, u: f64) -> f64 {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for m in 1..200 {
            let mq = m as f64 * q;
            let term = math::powf(u, 1.0 - mq) / (mq - 1.0);
            sum += sign * term;
            if term < 1e-17 * math::abs(sum).max(1e-300) {
                break;
            }
            sign = -sign;
        }
        sum
    }

    /// Inverse of the increasing bijection `h_q : R -> (-h_inf, h_inf)`.
    pub fn h_inverse(q: f64, v: f64) -> Option<f64> {
        let hinf = h_inf(q);
        if math::abs(v) >= hinf {
            return None;
        }
        if v == 0.0 {
            return Some(0.0);
        }
        let target = math::abs(v);
        // grow a bracket, then monotone Newton
        let mut hi = 1.0;
        for _ in 0..200 {
            if h(q, hi) > target {
                break;
            }
            hi *= 2.0;
        }
        let f = |u: f64| h(q, u);
        let df = |u: f64| h_prime(q, u);
        let u = quad::invert_monotone(&f, &df, target, 0.0, hi, 1e-14 * hi.max(1.0)).ok()?;
        Some(if v > 0.0 { u } else { -u })
    }
}

/// Analysis window `[e-, c+]` with expansion/contraction subintervals
/// and the constants of the assumption suite.
///
/// The derived slopes obey `alpha_c^-1 = alpha_e = alpha^(2/p)` and
/// `alpha_l^-1 = alpha_u = alpha^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strip {
    pub e_minus: f64,
    pub e_plus: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    /// Steepness scale of the slope constants (not necessarily the
    /// family's alpha).
    pub alpha: f64,
    /// Exponent p >= sqrt(2) tying the four slope constants together.
    pub p: f64,
    /// Lower bound for the drive's second theta-derivative on I_0 x C.
    pub s: f64,
    /// Bound for |d_theta f| (and sqrt of the bound for |d_theta^2 f|).
    pub big_s: f64,
    pub alpha_e: f64,
    pub alpha_c: f64,
    pub alpha_u: f64,
    pub alpha_l: f64,
}

impl Strip {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e_minus: f64,
        e_plus: f64,
        c_minus: f64,
        c_plus: f64,
        alpha: f64,
        p: f64,
        s: f64,
        big_s: f64,
    ) -> Result<Self> {
        if !(e_minus < e_plus && e_plus < c_minus && c_minus < c_plus) {
            return Err(Error::InvalidStrip(format!(
                "need e- < e+ < c- < c+, got {e_minus}, {e_plus}, {c_minus}, {c_plus}"
            )));
        }
        if alpha <= 1.0 {
            return Err(Error::InvalidStrip(format!("alpha = {alpha} must be > 1")));
        }
        let sqrt2 = math::sqrt(2.0);
        if p < sqrt2 {
            return Err(Error::InvalidStrip(format!("p = {p} must be >= sqrt(2)")));
        }
        if s <= 0.0 || big_s <= 0.0 {
            return Err(Error::InvalidStrip("s and S must be positive".into()));
        }
        let alpha_e = math::powf(alpha, 2.0 / p);
        let alpha_u = math::powf(alpha, p);
        let strip = Self {
            e_minus,
            e_plus,
            c_minus,
            c_plus,
            alpha,
            p,
            s,
            big_s,
            alpha_e,
            alpha_c: 1.0 / alpha_e,
            alpha_u,
            alpha_l: 1.0 / alpha_u,
        };
        if !(0.0 < strip.alpha_l
            && strip.alpha_l < strip.alpha_c
            && strip.alpha_c < 1.0
            && 1.0 < strip.alpha_e
            && strip.alpha_e < strip.alpha_u)
        {
            return Err(Error::InvalidStrip(format!(
                "slope chain violated: alpha_l {} < alpha_c {} < 1 < alpha_e {} < alpha_u {}",
                strip.alpha_l, strip.alpha_c, strip.alpha_e, strip.alpha_u
            )));
        }
        Ok(strip)
    }

    /// |C| = c+ - c-.
    #[inline]
    pub fn c_width(&self) -> f64 {
        self.c_plus - self.c_minus
    }

    /// |E| = e+ - e-.
    #[inline]
    pub fn e_width(&self) -> f64 {
        self.e_plus - self.e_minus
    }

    /// Full window width c+ - e-.
    #[inline]
    pub fn width(&self) -> f64 {
        self.c_plus - self.e_minus
    }
}

/// Grid resolution for [`verify_assumptions`].
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub theta: usize,
    pub x: usize,
    pub beta: usize,
    /// Doubling rounds allowed when margins have not stabilised to 1%.
    pub max_refinements: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { theta: 2048, x: 512, beta: 64, max_refinements: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct AssumptionCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    /// Worst slack over the scanned grid; >= 0 means the inequality held
    /// everywhere (with room `margin`).
    pub margin: f64,
    /// Extremal grid point `(beta, theta, x)` attaining the margin.
    pub witness: (f64, f64, f64),
}

#[derive(Clone, Debug)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    /// Grid actually used after refinement.
    pub grid: (usize, usize, usize),
    pub refinements: usize,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct MarginAcc {
    margin: f64,
    witness: (f64, f64, f64),
}

impl MarginAcc {
    fn new() -> Self {
        Self { margin: f64::INFINITY, witness: (f64::NAN, f64::NAN, f64::NAN) }
    }

    #[inline]
    fn update(&mut self, slack: f64, beta: f64, theta: f64, x: f64) {
        if slack < self.margin {
            self.margin = slack;
            self.witness = (beta, theta, x);
        }
    }

    fn into_check(self, id: &'static str, description: &'static str, tol: f64) -> AssumptionCheck {
        AssumptionCheck {
            id,
            description,
            passed: self.margin >= -tol,
            margin: self.margin,
            witness: self.witness,
        }
    }
}

/// Check the full assumption suite on a `(beta, theta, x)` grid.
///
/// Every inequality is scanned over its own domain; the report carries
/// the extremal witness per assumption. The grid doubles until the
/// extremal margins stabilise to 1% (at most `max_refinements` rounds).
pub fn verify_assumptions(
    fam: &Family,
    strip: &Strip,
    rot: &crate::torus::RotationSpec,
    grid: &GridSpec,
) -> Result<AssumptionReport> {
    let mut g = *grid;
    let mut report = verify_once(fam, strip, rot, &g, 0)?;
    for round in 1..=grid.max_refinements {
        let refined = GridSpec {
            theta: g.theta * 2,
            x: g.x * 2,
            beta: g.beta * 2,
            max_refinements: 0,
        };
        let next = verify_once(fam, strip, rot, &refined, round)?;
        let stable = report
            .checks
            .iter()
            .zip(next.checks.iter())
            .all(|(a, b)| margins_close(a.margin, b.margin));
        let was_stable = stable;
        g = refined;
        report = next;
        if was_stable {
            break;
        }
    }
    Ok(report)
}

fn margins_close(a: f64, b: f64) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return a == b;
    }
    math::abs(a - b) <= 0.01 * math::abs(b).max(1e-9)
}

fn verify_once(
    fam: &Family,
    strip: &Strip,
    rot: &crate::torus::RotationSpec,
    grid: &GridSpec,
    refinement_round: usize,
) -> Result<AssumptionReport> {
    use crate::regions;

    let nb = grid.beta.max(2);
    let nt = grid.theta.max(8);
    let nx = grid.x.max(8);

    let betas: Vec<f64> = (0..nb).map(|i| i as f64 / (nb - 1) as f64).collect();
    let thetas: Vec<f64> = (0..nt).map(|i| i as f64 / nt as f64).collect();
    let xs: Vec<f64> = (0..nx)
        .map(|i| strip.e_minus + strip.width() * i as f64 / (nx - 1) as f64)
        .collect();

    let mut a1 = MarginAcc::new();
    let mut a2 = MarginAcc::new();
    let mut a3 = MarginAcc::new();
    let mut a6 = MarginAcc::new();
    let mut a11 = MarginAcc::new();
    let mut a12 = MarginAcc::new();
    let mut a13 = MarginAcc::new();
    let mut a14 = MarginAcc::new();

    let s2 = strip.big_s * strip.big_s;
    for &beta in &betas {
        for &theta in &thetas {
            for &x in &xs {
                let p = fam.partials(beta, theta, x)?;
                let in_c = x >= strip.c_minus;
                let in_e = x <= strip.e_plus;
                if in_c {
                    a1.update(strip.alpha_c - p.fx, beta, theta, x);
                    a13.update(strip.big_s * strip.alpha_c - math::abs(p.fthetax), beta, theta, x);
                    a14.update(strip.alpha_c - math::abs(p.fxx), beta, theta, x);
                } else {
                    // x in [e-, c-): the coarse alpha_u^2 bounds apply
                    a13.update(
                        strip.big_s * strip.alpha_u * strip.alpha_u - math::abs(p.fthetax),
                        beta,
                        theta,
                        x,
                    );
                    a14.update(strip.alpha_u * strip.alpha_u - math::abs(p.fxx), beta, theta, x);
                }
                if in_e {
                    a2.update(p.fx - strip.alpha_e, beta, theta, x);
                }
                a3.update((p.fx - strip.alpha_l).min(strip.alpha_u - p.fx), beta, theta, x);
                a6.update(-p.fbeta, beta, theta, x);
                a11.update(strip.big_s - math::abs(p.ftheta), beta, theta, x);
                a12.update(s2 - math::abs(p.ftheta2), beta, theta, x);
            }
        }
    }

    // (A4): boundary graphs map below themselves, all beta and theta.
    let mut a4 = MarginAcc::new();
    for &beta in &betas {
        for &theta in &thetas {
            let top = fam.eval(beta, theta, strip.c_plus)?;
            a4.update(strip.c_plus - top, beta, theta, strip.c_plus);
            let bottom = fam.eval(beta, theta, strip.e_minus)?;
            a4.update(strip.e_minus - bottom, beta, theta, strip.e_minus);
        }
    }

    // (A5): two invariant graphs at beta = 0, none at beta = 1.
    let mut a5 = MarginAcc::new();
    for &theta in &thetas {
        a5.update(fam.eval(0.0, theta, strip.c_minus)? - strip.c_minus, 0.0, theta, strip.c_minus);
    }
    let mut min_f1_cplus = f64::INFINITY;
    let mut arg = 0.0;
    for &theta in &thetas {
        let v = fam.eval(1.0, theta, strip.c_plus)?;
        if v < min_f1_cplus {
            min_f1_cplus = v;
            arg = theta;
        }
    }
    a5.update(strip.e_minus - min_f1_cplus, 1.0, arg, strip.c_plus);

    // (A7): joint continuity, tested as finite-difference consistency of
    // the first partials on a coarse subsample.
    let mut a7 = MarginAcc::new();
    let fd_tol = 2e-4;
    for bi in 0..4 {
        let beta = 0.1 + 0.25 * bi as f64;
        for ti in 0..16 {
            let theta = (ti as f64 + 0.37) / 16.0;
            for xi in 0..16 {
                let x = strip.e_minus + strip.width() * (xi as f64 + 0.5) / 16.0;
                let p = fam.partials(beta, theta, x)?;
                let h = 1e-6;
                let dx_fd =
                    (fam.eval(beta, theta, x + h)? - fam.eval(beta, theta, x - h)?) / (2.0 * h);
                let dt_fd =
                    (fam.eval(beta, theta + h, x)? - fam.eval(beta, theta - h, x)?) / (2.0 * h);
                let ex = math::abs(dx_fd - p.fx) / (1.0 + math::abs(p.fx));
                let et = math::abs(dt_fd - p.ftheta) / (1.0 + math::abs(p.ftheta));
                a7.update(fd_tol - ex.max(et), beta, theta, x);
            }
        }
    }

    // (A8)-(A10), (A15), (A16) need the critical region I_0(beta) over
    // the admissible window B(0).
    let (beta_lo, beta_hi) = regions::beta_bounds0(fam, strip)?;
    let b0_grid: Vec<f64> = (0..nb)
        .map(|i| beta_lo + (beta_hi - beta_lo) * i as f64 / (nb - 1) as f64)
        .collect();

    let mut a8 = MarginAcc::new();
    let mut a9 = MarginAcc::new();
    let mut a10 = MarginAcc::new();
    let mut a15 = MarginAcc::new();
    let mut a16 = MarginAcc::new();
    let mut prev_region: Option<crate::torus::Arc> = None;

    let nt_sub = (nt / 4).max(64);
    let nx_sub = (nx / 4).max(32);
    for &beta in &b0_grid {
        let region = regions::critical_region0(fam, strip, beta)?;
        // (A10): convexity is enforced inside critical_region0 (it
        // errors on multi-component sublevel sets); monotone growth in
        // beta is checked against the previous grid parameter.
        match (&prev_region, &region.arc) {
            (Some(prev), Some(cur)) => {
                let slack = cur.half_width()
                    - prev.half_width()
                    - crate::torus::circle_dist(cur.center(), prev.center());
                a10.update(slack, beta, cur.center(), 0.0);
            }
            (Some(_prev), None) => {
                // region shrank to empty as beta grew: violates monotonicity
                a10.update(-1.0, beta, 0.0, 0.0);
            }
            _ => {}
        }
        prev_region = region.arc;

        // (A8): off I_0, the interval [e+, c+] maps into C. Monotone
        // fibre maps make x = e+ the binding lower case; the upper side
        // is (A4). Also scan a few interior x for safety.
        for i in 0..nt_sub {
            let theta = i as f64 / nt_sub as f64;
            if region.arc.map(|a| a.contains(theta)).unwrap_or(false) {
                continue;
            }
            let v = fam.eval(beta, theta, strip.e_plus)?;
            a8.update(v - strip.c_minus, beta, theta, strip.e_plus);
            let vc = fam.eval(beta, theta, strip.c_plus)?;
            a8.update(strip.c_plus - vc, beta, theta, strip.c_plus);
        }

        // (A9): drive curvature lower bound on I_0 x C.
        if let Some(arc) = &region.arc {
            for theta in arc.sample(nt_sub.min(256)) {
                for xi in 0..nx_sub {
                    let x = strip.c_minus + strip.c_width() * xi as f64 / (nx_sub - 1) as f64;
                    let p = fam.partials(beta, theta, x)?;
                    a9.update(p.ftheta2 - strip.s, beta, theta, x);
                }
            }
        }

        // (A15)/(A16): inverse-map bounds off I_0 + omega, x in E.
        let shifted = region.arc.map(|a| a.translate(rot.omega));
        for i in 0..nt_sub {
            let theta = i as f64 / nt_sub as f64;
            if shifted.map(|a| a.contains(theta)).unwrap_or(false) {
                continue;
            }
            let base = reduce(theta - rot.omega);
            for xi in 0..nx_sub {
                let x = strip.e_minus + strip.e_width() * xi as f64 / (nx_sub - 1) as f64;
                match fam.inverse_partials(beta, base, x) {
                    Ok((u, ip)) => {
                        a15.update(1.0 / strip.alpha_e - math::abs(ip.fxx), beta, theta, u);
                        a16.update(
                            strip.big_s / strip.alpha_e - math::abs(ip.fthetax),
                            beta,
                            theta,
                            u,
                        );
                    }
                    Err(_) => {
                        // no preimage where (A8') promises one
                        a15.update(f64::NEG_INFINITY, beta, theta, x);
                    }
                }
            }
        }
    }

    let tol = 0.0;
    let checks = alloc::vec![
        a1.into_check("A1", "d_x f < alpha_c on T x C", tol),
        a2.into_check("A2", "d_x f > alpha_e on T x E", tol),
        a3.into_check("A3", "alpha_l < d_x f < alpha_u on the strip", tol),
        a4.into_check("A4", "f(c+) <= c+ and f(e-) <= e-", tol),
        a5.into_check("A5", "f_0(c-) >= c- everywhere; f_1(c+) <= e- somewhere", tol),
        a6.into_check("A6", "d_beta f < 0 on the strip", tol),
        a7.into_check("A7", "partials consistent with finite differences", tol),
        a8.into_check("A8", "f maps [e+, c+] into C off I_0", tol),
        a9.into_check("A9", "d_theta^2 f > s on I_0 x C over B(0)", tol),
        a10.into_check("A10", "I_0 closed, convex, monotone in beta", 1e-9),
        a11.into_check("A11", "|d_theta f| < S on the strip", tol),
        a12.into_check("A12", "|d_theta^2 f| < S^2 on the strip", tol),
        a13.into_check("A13", "|d_theta d_x f| < S alpha_c on C, < S alpha_u^2 below", tol),
        a14.into_check("A14", "|d_x^2 f| < alpha_c on C, < alpha_u^2 below", tol),
        a15.into_check("A15", "|d_x^2 f^-1| < alpha_e^-1 off I_0 + omega on E", tol),
        a16.into_check("A16", "|d_theta d_x f^-1| < S alpha_e^-1 off I_0 + omega on E", tol),
    ];

    Ok(AssumptionReport { checks, grid: (nt, nx, nb), refinements: refinement_round })
}

/// Validate a custom family's supplied partials against central finite
/// differences on a sample grid over the strip. Called at load time.
pub fn validate_custom(fam: &Family, strip: &Strip) -> Result<()> {
    let c = match fam {
        Family::Custom(c) => c,
        _ => return Ok(()),
    };
    let h = 1e-5;
    let mut worst: (f64, &str) = (0.0, "");
    for bi in 0..3 {
        let beta = 0.15 + 0.3 * bi as f64;
        for ti in 0..9 {
            let theta = (ti as f64 + 0.21) / 9.0;
            for xi in 0..9 {
                let x = strip.e_minus + strip.width() * (xi as f64 + 0.5) / 9.0;
                if x - 2.0 * h < c.domain.0 || x + 2.0 * h > c.domain.1 {
                    continue;
                }
                let f = |t: f64, xx: f64, b: f64| c.f.eval(t, xx, b);
                let p = fam.partials(beta, theta, x)?;
                let checks: [(f64, f64, &str); 5] = [
                    ((f(theta, x + h, beta) - f(theta, x - h, beta)) / (2.0 * h), p.fx, "fx"),
                    ((f(theta + h, x, beta) - f(theta - h, x, beta)) / (2.0 * h), p.ftheta, "ftheta"),
                    (
                        (f(theta, x, beta + h) - f(theta, x, beta - h)) / (2.0 * h),
                        p.fbeta,
                        "fbeta",
                    ),
                    (
                        (f(theta, x + h, beta) - 2.0 * f(theta, x, beta) + f(theta, x - h, beta))
                            / (h * h),
                        p.fxx,
                        "fxx",
                    ),
                    (
                        (f(theta + h, x, beta) - 2.0 * f(theta, x, beta) + f(theta - h, x, beta))
                            / (h * h),
                        p.ftheta2,
                        "ftheta2",
                    ),
                ];
                for (fd, an, name) in checks {
                    let err = math::abs(fd - an) / (1.0 + math::abs(an));
                    if err > worst.0 {
                        worst = (err, name);
                    }
                }
                // mixed partial
                let mixed = (f(theta + h, x + h, beta) - f(theta + h, x - h, beta)
                    - f(theta - h, x + h, beta)
                    + f(theta - h, x - h, beta))
                    / (4.0 * h * h);
                let err = math::abs(mixed - p.fthetax) / (1.0 + math::abs(p.fthetax));
                if err > worst.0 {
                    worst = (err, "fthetax");
                }
            }
        }
    }
    if worst.0 > 1e-3 {
        return Err(Error::InvalidFamily(format!(
            "custom partial '{}' disagrees with finite differences (relative error {:.3e})",
            worst.1, worst.0
        )));
    }
    Ok(())
}

/// Convenience constructor for an affine test family
/// `f(theta, x) = a x + b + amp sin(2 pi theta) - beta`, handy in tests
/// and as the autonomous-fold building block.
pub fn affine_family(a: f64, b: f64, amp: f64) -> Family {
    let omega = 0.0;
    let s = |src: &str| Expr::parse(src, omega).unwrap();
    Family::Custom(CustomFamily {
        f: s(&format!("{a}*x + {b} + {amp}*sin(2*pi*theta) - beta")),
        fx: s(&format!("{a}")),
        fxx: s("0"),
        ftheta: s(&format!("{amp}*2*pi*cos(2*pi*theta)")),
        ftheta2: s(&format!("-{amp}*4*pi*pi*sin(2*pi*theta)")),
        fthetax: s("0"),
        fbeta: s("-1"),
        domain: (-1e9, 1e9),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::RotationSpec;

    #[test]
    fn eval_trivia() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        assert_eq!(fam.eval(0.0, 0.37, 0.0).unwrap(), 0.0);
        let v = fam.eval(0.78, 0.0, 0.0).unwrap();
        assert!((v + 1.56).abs() < 1e-12);

        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let v = fam.eval(1.0, 0.5, 0.0).unwrap();
        assert!(v.abs() < 1e-12, "drive term vanishes at theta = 1/2, got {v}");
    }

    #[test]
    fn inverse_round_trip() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        // x = tan(-1 + 0.5*(1+cos 0))/100 = 0
        let omega = RotationSpec::golden(1).omega;
        let x = fam.inverse_eval(0.5, omega, omega, -1.0).unwrap();
        assert!(x.abs() < 1e-12);

        for i in 0..200 {
            let beta = 0.003 * i as f64;
            let theta = reduce(0.61 * i as f64);
            let x = -0.02 + 1.5 * (i as f64 / 200.0);
            let y = fam.eval(beta, theta, x).unwrap();
            let back = fam.inverse_at(beta, theta, y).unwrap();
            assert!((back - x).abs() < 1e-12, "i={i} x={x} back={back}");
        }
    }

    #[test]
    fn inverse_no_preimage() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        // at theta=0, beta=1 the drive is 2; y + 2 > pi/2 has no preimage
        assert!(matches!(
            fam.inverse_at(1.0, 0.0, 1.0),
            Err(Error::NoPreimage { .. })
        ));
    }

    #[test]
    fn hq_matches_arctan_at_q2() {
        // h_2 = arctan: strong oracle for the quadrature + tail series
        for &u in &[0.0, 0.3, 1.0, 1.9, 2.0, 2.5, 10.0, 157.0, -3.7] {
            let v = hq::h(2.0, u);
            assert!((v - math::atan(u)).abs() < 1e-12, "u={u}: {v} vs {}", math::atan(u));
        }
        assert!((hq::h_inf(2.0) - FRAC_PI_2).abs() < 1e-14);
        // h_q(inf) = pi/(q sin(pi/q))
        let q = 3.5;
        // truncated tail beyond 1e4 is ~ (1e4)^(-2.5)/2.5 ~ 4e-11
        let direct =
            quad::adaptive_simpson(&|z: f64| 1.0 / (1.0 + math::powf(z, q)), 0.0, 1e4, 1e-12);
        assert!((hq::h_inf(q) - direct).abs() < 1e-8);
    }

    #[test]
    fn hq_inverse_round_trip() {
        for &q in &[1.5, 2.0, 4.0] {
            for i in 0..40 {
                let u = -5.0 + 0.25 * i as f64;
                let v = hq::h(q, u);
                let back = hq::h_inverse(q, v).unwrap();
                assert!((back - u).abs() < 1e-9 * (1.0 + u.abs()), "q={q} u={u} back={back}");
            }
            assert!(hq::h_inverse(q, hq::h_inf(q)).is_none());
        }
    }

    #[test]
    fn harper_monotone_and_invertible() {
        let fam = Family::Harper { e0: 3.0, coupling: 0.5, span: 1.0 };
        let beta = 0.2;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..100 {
            let x = -0.5 + i as f64 / 99.0;
            let v = fam.eval(beta, 0.3, x).unwrap();
            assert!(v > prev, "harper fibre map not increasing at x={x}");
            prev = v;
            let back = fam.inverse_at(beta, 0.3, v).unwrap();
            assert!((back - x).abs() < 1e-10);
        }
    }

    #[test]
    fn custom_partials_validation_catches_wrong_derivative() {
        let omega = 0.0;
        let s = |src: &str| Expr::parse(src, omega).unwrap();
        let good = Family::Custom(CustomFamily {
            f: s("arctan(10*x) - beta*(1 + cos(2*pi*theta))"),
            fx: s("10/(1 + 100*x^2)"),
            fxx: s("-2000*x/(1 + 100*x^2)^2"),
            ftheta: s("2*pi*beta*sin(2*pi*theta)"),
            ftheta2: s("4*pi*pi*beta*cos(2*pi*theta)"),
            fthetax: s("0"),
            fbeta: s("-(1 + cos(2*pi*theta))"),
            domain: (-50.0, 50.0),
        });
        let strip = Strip::new(-0.1, 0.1, 0.5, 1.5, 10.0, 3.0, 1.0, 7.0).unwrap();
        validate_custom(&good, &strip).unwrap();

        let bad = match &good {
            Family::Custom(c) => {
                let mut c = c.clone();
                c.fx = s("10/(1 + 10*x^2)");
                Family::Custom(c)
            }
            _ => unreachable!(),
        };
        assert!(validate_custom(&bad, &strip).is_err());
    }

    #[test]
    fn strip_rejects_bad_ordering() {
        assert!(Strip::new(0.0, 0.5, 0.4, 1.5, 100.0, 3.0, 1.0, 6.0).is_err());
        assert!(Strip::new(0.0, 0.1, 0.4, 1.5, 0.5, 3.0, 1.0, 6.0).is_err());
        assert!(Strip::new(0.0, 0.1, 0.4, 1.5, 100.0, 1.0, 1.0, 6.0).is_err());
    }

    #[test]
    fn strip_derived_constants() {
        let s = Strip::new(0.0, 0.026, 0.4, FRAC_PI_2, 100.0, 12.0, 0.5, 5.6).unwrap();
        assert!((s.alpha_e * s.alpha_c - 1.0).abs() < 1e-15);
        assert!((s.alpha_u * s.alpha_l - 1.0).abs() < 1e-15);
        assert!((s.alpha_e - math::powf(100.0, 2.0 / 12.0)).abs() < 1e-12);
    }
}
