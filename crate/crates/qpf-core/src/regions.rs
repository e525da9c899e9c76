//! Inductive critical-region machinery.
//!
//! Level 0: the natural critical region `I_0 = {theta : f(theta, e+) <=
//! c-}` and the admissible window `B(0) = [beta_-(0), beta_+(0)]`.
//! Level n+1: the sublevel set of `phi_n^- - psi_n^+` on `I_n + omega`
//! (the 1-d characterisation of the 2-d image intersection), tangency
//! parameters by bisection in beta, the `(F1)/(F2)` combinatorial
//! conditions via exact arc arithmetic, and the quantitative strip
//! bounds (heights, curvature gap nu, the c-tilde constants).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{Family, Strip};
use crate::jet::{self, Jet2};
use crate::math;
use crate::quad;
use crate::torus::{reduce, Arc, RotationSpec};

/// Default theta grid for sublevel extraction and tangency searches.
pub const REGION_GRID: usize = 4096;
/// Theta grid used when sampling strip functions for reports.
pub const STRIP_GRID: usize = 513;
/// Bisection tolerance for tangency parameters.
pub const BETA_TOL: f64 = 1e-12;

/// The arc `I_{n, beta}` (None = empty region marker).
#[derive(Clone, Copy, Debug)]
pub struct CriticalRegion {
    pub level: usize,
    pub beta: f64,
    pub arc: Option<Arc>,
}

impl CriticalRegion {
    pub fn width(&self) -> f64 {
        self.arc.map(|a| a.width()).unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.arc.is_none()
    }
}

// ---------------------------------------------------------------------
// level 0
// ---------------------------------------------------------------------

/// Extract the sublevel set {g <= 0} on the full circle, expected to be
/// empty, a point, or a single closed arc.
fn sublevel_circle<G: Fn(f64) -> Result<f64>>(g: &G, grid: usize) -> Result<Option<Arc>> {
    let vals: Result<Vec<f64>> = (0..grid).map(|i| g(i as f64 / grid as f64)).collect();
    let vals = vals?;
    let neg: Vec<bool> = vals.iter().map(|&v| v <= 0.0).collect();
    let count = neg.len();
    let components = {
        let mut c = 0usize;
        for i in 0..count {
            if neg[i] && !neg[(i + count - 1) % count] {
                c += 1;
            }
        }
        c
    };
    if components > 1 {
        return Err(Error::NonConvexRegion { components });
    }
    if components == 0 {
        if neg[0] {
            // every grid point is inside: region covers the circle
            return Err(Error::HypothesisViolation(
                "critical region covers the whole circle".into(),
            ));
        }
        // no grid point inside: refine around the grid argmin to catch a
        // sub-cell arc or an exact tangency
        let (imin, _) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let h = 1.0 / grid as f64;
        let t0 = imin as f64 * h;
        let wrapped = |t: f64| g(reduce(t)).unwrap_or(f64::INFINITY);
        let (tmin, vmin) = quad::golden_min(&wrapped, t0 - h, t0 + h, 1e-14);
        if vmin > 0.0 {
            return Ok(None);
        }
        if vmin == 0.0 {
            return Ok(Some(Arc::point(tmin)));
        }
        let lo = quad::bisect(&wrapped, t0 - h, tmin, 1e-14)?;
        let hi = quad::bisect(&|t: f64| -wrapped(t), tmin, t0 + h, 1e-14)
            .map(|r| r)
            .unwrap_or_else(|_| tmin);
        return Ok(Some(Arc::from_endpoints(reduce(lo), reduce(hi))?));
    }
    // exactly one component: find entry and exit indices
    let entry = (0..count)
        .find(|&i| neg[i] && !neg[(i + count - 1) % count])
        .expect("component exists");
    let mut exit = entry;
    while neg[(exit + 1) % count] {
        exit = (exit + 1) % count;
        if exit == entry {
            break;
        }
    }
    let h = 1.0 / count as f64;
    let gi = |i: usize| vals[i % count];
    // crossing in [entry-1, entry]: g > 0 -> g <= 0
    let t_entry = {
        let a = (entry as f64 - 1.0) * h;
        let b = entry as f64 * h;
        debug_assert!(gi(entry + count - 1) > 0.0 && gi(entry) <= 0.0);
        quad::bisect(&|t: f64| g(reduce(t)).unwrap_or(f64::INFINITY), a, b, 1e-14)?
    };
    let t_exit = {
        let a = exit as f64 * h;
        let b = (exit as f64 + 1.0) * h;
        quad::bisect(&|t: f64| g(reduce(t)).unwrap_or(f64::INFINITY), a, b, 1e-14)?
    };
    Ok(Some(Arc::from_endpoints(reduce(t_entry), reduce(t_exit))?))
}

/// `I_{0, beta} = {theta : f_beta(theta, e+) <= c-}`, the natural
/// critical region. A single closed arc for single-hump drives; errors
/// if the sublevel set splits into several components.
pub fn critical_region0(fam: &Family, strip: &Strip, beta: f64) -> Result<CriticalRegion> {
    let g = |theta: f64| Ok(fam.eval(beta, theta, strip.e_plus)? - strip.c_minus);
    let arc = sublevel_circle(&g, REGION_GRID)?;
    Ok(CriticalRegion { level: 0, beta, arc })
}

/// Minimum of `f` over the circle: grid scan plus golden refinement.
fn min_over_circle<G: Fn(f64) -> Result<f64>>(g: &G, grid: usize) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::INFINITY);
    for i in 0..grid {
        let t = i as f64 / grid as f64;
        let v = g(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    let h = 1.0 / grid as f64;
    let wrapped = |t: f64| g(reduce(t)).unwrap_or(f64::INFINITY);
    let (tm, vm) = quad::golden_min(&wrapped, best.0 - h, best.0 + h, 1e-13);
    if vm < best.1 {
        Ok((reduce(tm), vm))
    } else {
        Ok(best)
    }
}

/// `beta_+(0) = min{beta : exists theta, f_beta(theta, c+) = e-}` and
/// `beta_-(0) = max{beta <= beta_+(0) : forall theta, f_beta(theta, c-)
/// >= e+}`, both located by monotone bisection in beta.
pub fn beta_bounds0(fam: &Family, strip: &Strip) -> Result<(f64, f64)> {
    let grid = 2048;
    // m(beta) = min_theta f(c+) - e-, strictly decreasing in beta (A6)
    let m = |beta: f64| -> Result<f64> {
        let (_, v) = min_over_circle(&|t: f64| fam.eval(beta, t, strip.c_plus), grid)?;
        Ok(v - strip.e_minus)
    };
    if m(0.0)? <= 0.0 {
        return Err(Error::NotFound("f_0(c+) already reaches e- ((A5) violated at beta = 0)"));
    }
    if m(1.0)? > 0.0 {
        return Err(Error::NotFound("f_1(c+) never reaches e- on [0,1] ((A5) fails)"));
    }
    let beta_plus = quad::bisect(&|b: f64| m(b).unwrap_or(f64::INFINITY), 0.0, 1.0, BETA_TOL)?;

    // g(beta) = min_theta f(c-) - e+, also decreasing
    let gfun = |beta: f64| -> Result<f64> {
        let (_, v) = min_over_circle(&|t: f64| fam.eval(beta, t, strip.c_minus), grid)?;
        Ok(v - strip.e_plus)
    };
    if gfun(0.0)? < 0.0 {
        return Err(Error::NotFound("f_0(c-) drops below e+ for some theta"));
    }
    let beta_minus = if gfun(beta_plus)? >= 0.0 {
        beta_plus
    } else {
        quad::bisect(&|b: f64| gfun(b).unwrap_or(f64::NEG_INFINITY), 0.0, beta_plus, BETA_TOL)?
    };
    Ok((beta_minus, beta_plus))
}

// ---------------------------------------------------------------------
// strip functions
// ---------------------------------------------------------------------

/// Forward strip value `f^m_{theta - m omega}(x0)`.
pub fn phi_value(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta: f64,
    m: usize,
    x0: f64,
) -> Result<f64> {
    let mut x = x0;
    for j in (1..=m).rev() {
        let base = reduce(theta - j as f64 * omega);
        x = fam.eval(beta, base, x)?;
    }
    Ok(x)
}

/// Backward strip value `f^-m_{theta + m omega}(x0)`.
pub fn psi_value(
    fam: &Family,
    omega: f64,
    beta: f64,
    theta: f64,
    m: usize,
    x0: f64,
) -> Result<f64> {
    let mut x = x0;
    for j in (0..m).rev() {
        let fibre_base = reduce(theta + j as f64 * omega);
        x = fam.inverse_at(beta, fibre_base, x)?;
    }
    Ok(x)
}

/// The four strip functions with first and second theta-derivatives,
/// sampled on a grid over `I_n + omega`.
#[derive(Clone, Debug)]
pub struct StripSamples {
    pub level: usize,
    pub beta: f64,
    pub m: usize,
    pub thetas: Vec<f64>,
    pub phi_minus: Vec<Jet2>,
    pub phi_plus: Vec<Jet2>,
    pub psi_minus: Vec<Jet2>,
    pub psi_plus: Vec<Jet2>,
}

impl StripSamples {
    /// Measured strip height sup |phi+ - phi-|.
    pub fn h_phi(&self) -> f64 {
        self.phi_plus
            .iter()
            .zip(&self.phi_minus)
            .map(|(p, m)| math::abs(p.x - m.x))
            .fold(0.0, f64::max)
    }

    pub fn h_psi(&self) -> f64 {
        self.psi_plus
            .iter()
            .zip(&self.psi_minus)
            .map(|(p, m)| math::abs(p.x - m.x))
            .fold(0.0, f64::max)
    }

    /// Measured nu^-: grid minimum of (phi^-)'' - (psi^+)''.
    pub fn nu_minus(&self) -> f64 {
        self.phi_minus
            .iter()
            .zip(&self.psi_plus)
            .map(|(p, q)| p.dtheta2 - q.dtheta2)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn nu_plus(&self) -> f64 {
        self.phi_plus
            .iter()
            .zip(&self.psi_minus)
            .map(|(p, q)| p.dtheta2 - q.dtheta2)
            .fold(f64::INFINITY, f64::min)
    }
}

fn strip_samples_for_region(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    region: &CriticalRegion,
    m: usize,
    grid: usize,
) -> Result<StripSamples> {
    let arc = region
        .arc
        .ok_or(Error::EmptyInterval("strip functions need a non-empty region"))?;
    let domain = arc.translate(omega);
    let thetas = if arc.width() == 0.0 {
        alloc::vec![domain.center()]
    } else {
        domain.sample(grid)
    };
    let mf = m as f64;
    let mut phi_minus = Vec::with_capacity(thetas.len());
    let mut phi_plus = Vec::with_capacity(thetas.len());
    let mut psi_minus = Vec::with_capacity(thetas.len());
    let mut psi_plus = Vec::with_capacity(thetas.len());
    for &t in &thetas {
        let start = reduce(t - mf * omega);
        phi_minus.push(*jet::jet_forward(fam, omega, beta, start, strip.c_minus, m)?.last().unwrap());
        phi_plus.push(*jet::jet_forward(fam, omega, beta, start, strip.c_plus, m)?.last().unwrap());
        let bstart = reduce(t + mf * omega);
        psi_minus.push(*jet::jet_backward(fam, omega, beta, bstart, strip.e_minus, m)?.last().unwrap());
        psi_plus.push(*jet::jet_backward(fam, omega, beta, bstart, strip.e_plus, m)?.last().unwrap());
    }
    Ok(StripSamples { level: region.level, beta, m, thetas, phi_minus, phi_plus, psi_minus, psi_plus })
}

/// Sample `phi_n^±`, `psi_n^±` on `I_n + omega`. The region tower up to
/// level `n` is recomputed from the schedule's chosen `M_j`.
pub fn strip_functions(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n: usize,
    schedule: &Schedule,
    grid: usize,
) -> Result<StripSamples> {
    let tower = region_tower(fam, strip, omega, beta, schedule, n)?;
    let region = &tower[n];
    let m = schedule.m(n)?;
    strip_samples_for_region(fam, strip, omega, beta, region, m, grid)
}

// ---------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------

/// The `(M_n, K_n, b_n)` schedule with `K_n = K_0 kappa^n` and
/// `b_n = (1 - 1/K_{n-1}) b_{n-1}`, `b_0 = 1`.
#[derive(Clone, Debug)]
pub struct Schedule {
    m: Vec<usize>,
    pub k0: u64,
    pub kappa: u64,
    pub b_inf: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
}

impl Schedule {
    pub fn new(m0: usize, k0: u64, kappa: u64, strip: &Strip) -> Result<Self> {
        if m0 < 2 {
            return Err(Error::InvalidSchedule(format!("M_0 = {m0} must be >= 2")));
        }
        if k0 < 2 || kappa < 2 {
            return Err(Error::InvalidSchedule("K_0 and kappa must be >= 2".into()));
        }
        let sum_inv_k = (kappa as f64) / ((kappa - 1) as f64) / (k0 as f64);
        if sum_inv_k > 1.0 / 6.0 {
            return Err(Error::InvalidSchedule(format!(
                "sum 1/K_j = {sum_inv_k:.4} exceeds 1/6"
            )));
        }
        // b = prod_{j>=0} (1 - 1/(k0 kappa^j))
        let mut b_inf = 1.0f64;
        let mut kj = k0 as f64;
        loop {
            let factor = 1.0 - 1.0 / kj;
            b_inf *= factor;
            kj *= kappa as f64;
            if 1.0 / kj < 1e-18 {
                break;
            }
        }
        let alpha_minus = math::powf(strip.alpha_c, b_inf) * math::powf(strip.alpha_u, 1.0 - b_inf);
        let alpha_plus = math::powf(strip.alpha_e, b_inf) * math::powf(strip.alpha_l, 1.0 - b_inf);
        Ok(Self { m: alloc::vec![m0], k0, kappa, b_inf, alpha_minus, alpha_plus })
    }

    /// `K_n = K_0 kappa^n`.
    pub fn k(&self, n: usize) -> u64 {
        self.k0 * self.kappa.pow(n as u32)
    }

    /// `b_n` via the recursion.
    pub fn b(&self, n: usize) -> f64 {
        let mut b = 1.0;
        for j in 0..n {
            b *= 1.0 - 1.0 / self.k(j) as f64;
        }
        b
    }

    pub fn m(&self, n: usize) -> Result<usize> {
        self.m.get(n).copied().ok_or_else(|| {
            Error::InvalidSchedule(format!("M_{n} not chosen yet (have {} levels)", self.m.len()))
        })
    }

    pub fn m_levels(&self) -> usize {
        self.m.len()
    }

    /// The Lemma-"F2" scan window for `M_n`, n >= 1.
    pub fn window(&self, n: usize) -> Result<(usize, usize)> {
        if n == 0 {
            return Err(Error::InvalidSchedule("M_0 has no scan window".into()));
        }
        let prev = self.m(n - 1)?;
        let k = self.k(n - 1) as usize;
        Ok((k * prev, 2 * k * prev))
    }

    /// Record a chosen `M_n`; must land in the window and keep the
    /// sequence strictly increasing.
    pub fn push_m(&mut self, m_n: usize) -> Result<()> {
        let n = self.m.len();
        let (lo, hi) = self.window(n)?;
        if m_n < lo || m_n > hi {
            return Err(Error::InvalidSchedule(format!(
                "M_{n} = {m_n} outside window [{lo}, {hi}]"
            )));
        }
        self.m.push(m_n);
        Ok(())
    }

    /// alpha_- < 1 and alpha_+ > 1: the sink-source slope conditions.
    pub fn admissible(&self) -> bool {
        self.alpha_minus < 1.0 && self.alpha_plus > 1.0
    }
}

// ---------------------------------------------------------------------
// next region and the tower
// ---------------------------------------------------------------------

pub struct NextRegion {
    pub region: CriticalRegion,
    /// False when the sublevel set split (nu <= 0 regime); the returned
    /// arc is then the hull from first entry to last exit.
    pub convex: bool,
}

/// Sublevel set of g on a (non-wrapping) arc parameterised from its left
/// endpoint. Returns (arc, components).
fn sublevel_on_arc<G: Fn(f64) -> Result<f64>>(
    g: &G,
    domain: &Arc,
    grid: usize,
) -> Result<(Option<Arc>, usize)> {
    let lo = domain.center() - domain.half_width();
    let w = domain.width();
    let n = grid.max(8);
    let step = w / (n - 1) as f64;
    let eval_at = |t: f64| g(reduce(lo + t));
    let vals: Result<Vec<f64>> = (0..n).map(|i| eval_at(i as f64 * step)).collect();
    let vals = vals?;
    let neg: Vec<bool> = vals.iter().map(|&v| v <= 0.0).collect();
    let mut components = 0usize;
    for i in 0..n {
        if neg[i] && (i == 0 || !neg[i - 1]) {
            components += 1;
        }
    }
    if components == 0 {
        // refine around the argmin for a sub-cell arc
        let (imin, _) =
            vals.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
        let t0 = imin as f64 * step;
        let safe = |t: f64| eval_at(t.clamp(0.0, w)).unwrap_or(f64::INFINITY);
        let (tm, vm) = quad::golden_min(&safe, (t0 - step).max(0.0), (t0 + step).min(w), 1e-15);
        if vm > 0.0 {
            return Ok((None, 0));
        }
        if vm == 0.0 {
            return Ok((Some(Arc::point(reduce(lo + tm))), 1));
        }
        let a = quad::bisect(&safe, (t0 - step).max(0.0), tm, 1e-15)?;
        let b = quad::bisect(&safe, tm, (t0 + step).min(w), 1e-15)?;
        return Ok((Some(Arc::from_endpoints(reduce(lo + a), reduce(lo + b))?), 1));
    }
    let first_entry = (0..n).find(|&i| neg[i] && (i == 0 || !neg[i - 1])).unwrap();
    let last_exit = (0..n).rev().find(|&i| neg[i] && (i == n - 1 || !neg[i + 1])).unwrap();
    let safe = |t: f64| eval_at(t).unwrap_or(f64::INFINITY);
    let t_entry = if first_entry == 0 {
        0.0
    } else {
        quad::bisect(&safe, (first_entry - 1) as f64 * step, first_entry as f64 * step, 1e-15)?
    };
    let t_exit = if last_exit == n - 1 {
        w
    } else {
        quad::bisect(&safe, last_exit as f64 * step, (last_exit + 1) as f64 * step, 1e-15)?
    };
    Ok((Some(Arc::from_endpoints(reduce(lo + t_entry), reduce(lo + t_exit))?), components))
}

fn step_region(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    region: &CriticalRegion,
    m: usize,
    grid: usize,
) -> Result<NextRegion> {
    let arc = match region.arc {
        Some(a) => a,
        None => {
            return Ok(NextRegion {
                region: CriticalRegion { level: region.level + 1, beta, arc: None },
                convex: true,
            })
        }
    };
    let domain = arc.translate(omega);
    // A missing preimage along the e+ backward orbit means the fibre
    // image tops out below e+, i.e. psi^+ = +inf: the sublevel condition
    // phi^- <= psi^+ holds trivially there. (Outside the paper's
    // smallness regime I_0 can be fat enough for this to happen.)
    let g = |theta: f64| -> Result<f64> {
        let phi = phi_value(fam, omega, beta, theta, m, strip.c_minus)?;
        match psi_value(fam, omega, beta, theta, m, strip.e_plus) {
            Ok(psi) => Ok(phi - psi),
            Err(Error::NoPreimage { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        }
    };
    let (sub, components) = if arc.width() == 0.0 {
        let v = g(domain.center())?;
        (if v <= 0.0 { Some(Arc::point(domain.center())) } else { None }, usize::from(v <= 0.0))
    } else {
        sublevel_on_arc(&g, &domain, grid)?
    };
    let shifted = sub.map(|a| a.translate(-omega));
    Ok(NextRegion {
        region: CriticalRegion { level: region.level + 1, beta, arc: shifted },
        convex: components <= 1,
    })
}

/// `I_{n+1, beta}` from the level-n strip tangency characterisation.
pub fn next_region(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n: usize,
    schedule: &Schedule,
    grid: usize,
) -> Result<NextRegion> {
    let tower = region_tower(fam, strip, omega, beta, schedule, n)?;
    step_region(fam, strip, omega, beta, &tower[n], schedule.m(n)?, grid)
}

/// Regions `I_0 .. I_{up_to}` at a fixed beta. Requires `M_j` chosen for
/// all j < up_to. Once a level is empty all deeper levels stay empty.
pub fn region_tower(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    schedule: &Schedule,
    up_to: usize,
) -> Result<Vec<CriticalRegion>> {
    let mut tower = Vec::with_capacity(up_to + 1);
    tower.push(critical_region0(fam, strip, beta)?);
    for n in 0..up_to {
        let next = step_region(fam, strip, omega, beta, &tower[n], schedule.m(n)?, REGION_GRID)?;
        tower.push(next.region);
    }
    Ok(tower)
}

// ---------------------------------------------------------------------
// admissible parameter intervals
// ---------------------------------------------------------------------

/// Minimum of a strip-difference over `I_n + omega`; orbit escapes and
/// missing preimages count as "touched" (they only occur past the
/// admissible range, where the strips have already collided with the
/// window boundary).
fn strip_gap_min(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    schedule: &Schedule,
    n: usize,
    outer: bool,
    grid: usize,
) -> Result<Option<f64>> {
    let tower = region_tower(fam, strip, omega, beta, schedule, n)?;
    let arc = match tower[n].arc {
        Some(a) => a,
        None => return Ok(None), // empty region: no gap to measure
    };
    let m = schedule.m(n)?;
    let domain = arc.translate(omega);
    let (fwd_x, back_x) = if outer {
        (strip.c_plus, strip.e_minus)
    } else {
        (strip.c_minus, strip.e_plus)
    };
    let g = |theta: f64| -> Result<f64> {
        let phi = phi_value(fam, omega, beta, theta, m, fwd_x)?;
        let psi = psi_value(fam, omega, beta, theta, m, back_x)?;
        Ok(phi - psi)
    };
    if arc.width() == 0.0 {
        return match g(domain.center()) {
            Ok(v) => Ok(Some(v)),
            Err(_) => Ok(Some(f64::NEG_INFINITY)),
        };
    }
    let lo = domain.center() - domain.half_width();
    let w = domain.width();
    let npts = grid.max(16);
    let step = w / (npts - 1) as f64;
    let mut best = (0.0f64, f64::INFINITY);
    for i in 0..npts {
        let t = i as f64 * step;
        match g(reduce(lo + t)) {
            Ok(v) => {
                if v < best.1 {
                    best = (t, v);
                }
            }
            Err(_) => return Ok(Some(f64::NEG_INFINITY)),
        }
    }
    let safe = |t: f64| g(reduce(lo + t.clamp(0.0, w))).unwrap_or(f64::NEG_INFINITY);
    let (_, vm) = quad::golden_min(&safe, (best.0 - step).max(0.0), (best.0 + step).min(w), 1e-14);
    Ok(Some(vm.min(best.1)))
}

/// `B(n)` recursively: `B(0)` from the boundary-graph conditions, then
/// tangency parameters of the level-(n-1) strips.
pub fn beta_interval(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    level: usize,
    schedule: &Schedule,
    grid: usize,
) -> Result<(f64, f64)> {
    if level == 0 {
        return beta_bounds0(fam, strip);
    }
    let (lo, hi) = beta_interval(fam, strip, omega, level - 1, schedule, grid)?;
    let n = level - 1;

    // inner tangency: first beta where min(phi^- - psi^+) <= 0
    let inner_sep = |beta: f64| -> f64 {
        match strip_gap_min(fam, strip, omega, beta, schedule, n, false, grid) {
            Ok(Some(v)) => v,
            Ok(None) => f64::INFINITY, // region empty: beta below the tangency
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let at_lo = inner_sep(lo);
    let at_hi = inner_sep(hi);
    let beta_minus = if at_lo <= 0.0 {
        lo
    } else if at_hi > 0.0 {
        return Err(Error::EmptyInterval("level strips never touch on B(n-1)"));
    } else {
        quad::bisect(&inner_sep, lo, hi, BETA_TOL)?
    };

    // outer tangency: first beta where min(phi^+ - psi^-) <= 0; if the
    // outer strips never collide the window keeps the previous cap
    let outer_sep = |beta: f64| -> f64 {
        match strip_gap_min(fam, strip, omega, beta, schedule, n, true, grid) {
            Ok(Some(v)) => v,
            Ok(None) => f64::INFINITY,
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let beta_plus = if outer_sep(hi) > 0.0 {
        hi
    } else if outer_sep(beta_minus) <= 0.0 {
        beta_minus
    } else {
        quad::bisect(&outer_sep, beta_minus, hi, BETA_TOL)?
    };
    Ok((beta_minus, beta_plus))
}

/// `(beta_-(n+1), beta_+(n+1))`: tangency parameters of the level-n
/// strips, located by bisection on the scalar gap minima.
pub fn admissible_interval(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    n: usize,
    schedule: &Schedule,
    grid: usize,
) -> Result<(f64, f64)> {
    beta_interval(fam, strip, omega, n + 1, schedule, grid)
}

// ---------------------------------------------------------------------
// combinatorial (F) conditions
// ---------------------------------------------------------------------

/// Exact circle positions as 96-bit fixed point; incremental rotation
/// adds are exact, so million-step translate scans carry no rounding.
mod fixed {
    pub const BITS: u32 = 96;
    pub const ONE: u128 = 1u128 << BITS;
    pub const MASK: u128 = ONE - 1;

    pub fn from_float(x: f64) -> u128 {
        // split to keep full f64 precision in the 96-bit scale
        let hi = libm::floor(x * (1u64 << 48) as f64);
        let rest = x * (1u64 << 48) as f64 - hi;
        let lo = libm::floor(rest * (1u64 << 48) as f64 + 0.5);
        (((hi as u128) << 48) + lo as u128) & MASK
    }

    pub fn to_float(p: u128) -> f64 {
        p as f64 / ONE as f64
    }

    pub fn add(a: u128, b: u128) -> u128 {
        (a + b) & MASK
    }

    pub fn sub(a: u128, b: u128) -> u128 {
        (a + ONE - b) & MASK
    }

    /// Distance to 0 on the circle.
    pub fn dist_zero(p: u128) -> u128 {
        p.min(ONE - p)
    }
}

/// Per-level report of the combinatorial conditions.
#[derive(Clone, Debug)]
pub struct FLevelReport {
    pub level: usize,
    pub width: f64,
    pub m_n: usize,
    pub k_n: u64,
    /// (F1)_n: the first 2 K_n M_n rotation translates avoid I_n.
    pub f1: bool,
    /// (F1)'_n margin: min_k d(I_n, I_n + k omega) - |I_n|.
    pub f1_prime_margin: f64,
    pub f1_prime: bool,
    /// (F2)_n: the pre/post windows avoid V_{n-1} and W_{n-1}.
    pub f2: bool,
    /// 2 |I_n| < C (2 K_n M_n)^(-eta): the Diophantine sufficient bound
    /// that already implies (F1)'.
    pub sufficient_bound: bool,
    /// Vacuously true levels (empty region).
    pub vacuous: bool,
}

#[derive(Clone, Debug)]
pub struct FReport {
    pub levels: Vec<FLevelReport>,
}

impl FReport {
    pub fn all_hold(&self) -> bool {
        self.levels.iter().all(|l| l.f1 && l.f2)
    }
}

/// Assemble `V_{j-1}` and `W_{j-1}` as explicit arc unions.
fn vw_unions(
    regions: &[CriticalRegion],
    schedule: &Schedule,
    omega: f64,
    j: usize,
) -> Result<(Vec<Arc>, Vec<Arc>)> {
    let mut v = Vec::new();
    let mut w = Vec::new();
    if j == 0 {
        return Ok((v, w));
    }
    for i in 0..j {
        if let Some(arc) = regions[i].arc {
            let mi = schedule.m(i)? as i64;
            for l in 1..=(mi + 1) {
                v.push(arc.translate(l as f64 * omega));
            }
            for l in -(mi - 1)..=0 {
                w.push(arc.translate(l as f64 * omega));
            }
        }
    }
    Ok((v, w))
}

/// Evaluate `(F1)_j`, `(F1)'_j`, `(F2)_j` and the sufficient Diophantine
/// bound for j = 0..=n, using exact arc arithmetic. The rotation
/// translates are scanned in 96-bit fixed point, so even million-step
/// windows are exact.
pub fn check_f_conditions(
    regions: &[CriticalRegion],
    schedule: &Schedule,
    rot: &RotationSpec,
    n: usize,
) -> Result<FReport> {
    if regions.len() <= n {
        return Err(Error::InvalidSchedule(format!(
            "need regions up to level {n}, have {}",
            regions.len()
        )));
    }
    let omega_fp = fixed::from_float(rot.omega);
    let mut levels = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let m_j = schedule.m(j)?;
        let k_j = schedule.k(j);
        let horizon = 2u64 * k_j * m_j as u64;
        let arc = match regions[j].arc {
            Some(a) => a,
            None => {
                levels.push(FLevelReport {
                    level: j,
                    width: 0.0,
                    m_n: m_j,
                    k_n: k_j,
                    f1: true,
                    f1_prime_margin: f64::INFINITY,
                    f1_prime: true,
                    f2: true,
                    sufficient_bound: true,
                    vacuous: true,
                });
                continue;
            }
        };
        let width = arc.width();
        // arcs I_j and I_j + k omega share the half-width, so they
        // intersect iff d(k omega, 0) <= |I_j|; the (F1)' gap is
        // min_k d(k omega, 0) - |I_j|.
        let mut min_dist = u128::MAX;
        let mut pos = 0u128;
        for _k in 1..=horizon {
            pos = fixed::add(pos, omega_fp);
            let d = fixed::dist_zero(pos);
            if d < min_dist {
                min_dist = d;
            }
        }
        let min_dist_f = fixed::to_float(min_dist);
        let f1 = min_dist_f > width;
        let f1_prime_margin = (min_dist_f - width) - width;
        let f1_prime = f1_prime_margin > 0.0;

        let (v, w) = vw_unions(regions, schedule, rot.omega, j)?;
        let pre = arc.translate(-((m_j as f64) - 1.0) * rot.omega);
        let post = arc.translate((m_j as f64 + 1.0) * rot.omega);
        let clash = v
            .iter()
            .chain(w.iter())
            .any(|a| a.intersects(&pre) || a.intersects(&post));
        let f2 = !clash;

        let sufficient = 2.0 * width
            < rot.dio_c * math::powf(2.0 * k_j as f64 * m_j as f64, -rot.dio_eta);
        levels.push(FLevelReport {
            level: j,
            width,
            m_n: m_j,
            k_n: k_j,
            f1,
            f1_prime_margin,
            f1_prime,
            f2,
            sufficient_bound: sufficient,
            vacuous: false,
        });
    }
    Ok(FReport { levels })
}

/// Scan the Lemma-"F2" window `[K_{n-1} M_{n-1}, 2 K_{n-1} M_{n-1}]`
/// for the smallest `M_n` satisfying `(F2)_n` at `beta = beta_+(n)`
/// (monotonicity makes that one beta sufficient).
pub fn choose_mn(
    fam: &Family,
    strip: &Strip,
    rot: &RotationSpec,
    schedule: &Schedule,
    n: usize,
    grid: usize,
) -> Result<usize> {
    let (win_lo, win_hi) = schedule.window(n)?;
    let (_, beta_plus) = beta_interval(fam, strip, rot.omega, n, schedule, grid)?;
    let tower = region_tower(fam, strip, rot.omega, beta_plus, schedule, n)?;
    let arc = match tower[n].arc {
        Some(a) => a,
        None => return Ok(win_lo), // vacuous: any window value works
    };
    let (v, w) = vw_unions(&tower, schedule, rot.omega, n)?;
    if v.is_empty() && w.is_empty() {
        return Ok(win_lo);
    }
    // bad set: positions of the arc center for which the translated
    // region hits V union W, inflated by both half-widths
    let mut bad: Vec<(u128, u128)> = Vec::new();
    for a in v.iter().chain(w.iter()) {
        let r = arc.half_width() + a.half_width();
        if r >= 0.5 {
            return Err(Error::NoAdmissibleM { level: n });
        }
        let c = fixed::from_float(a.center());
        let rf = fixed::from_float(r);
        bad.push((fixed::sub(c, rf), fixed::add(c, rf)));
    }
    // merge into disjoint sorted intervals (split wrapped ones first)
    let mut flat: Vec<(u128, u128)> = Vec::with_capacity(bad.len() + 4);
    for (lo, hi) in bad {
        if lo <= hi {
            flat.push((lo, hi));
        } else {
            flat.push((0, hi));
            flat.push((lo, fixed::MASK));
        }
    }
    flat.sort_unstable();
    let mut merged: Vec<(u128, u128)> = Vec::with_capacity(flat.len());
    for iv in flat {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    let hit = |p: u128| -> bool {
        let idx = merged.partition_point(|iv| iv.0 <= p);
        idx > 0 && merged[idx - 1].1 >= p
    };
    let omega_fp = fixed::from_float(rot.omega);
    let center_fp = fixed::from_float(arc.center());
    // position of center - (M-1) omega and center + (M+1) omega,
    // advanced incrementally over the window
    let mul = |k: usize| -> u128 {
        let mut acc = 0u128;
        let mut base = omega_fp;
        let mut kk = k as u128;
        while kk > 0 {
            if kk & 1 == 1 {
                acc = fixed::add(acc, base);
            }
            base = fixed::add(base, base);
            kk >>= 1;
        }
        acc
    };
    let mut pre = fixed::sub(center_fp, mul(win_lo - 1));
    let mut post = fixed::add(center_fp, mul(win_lo + 1));
    for m_candidate in win_lo..=win_hi {
        if !hit(pre) && !hit(post) {
            return Ok(m_candidate);
        }
        pre = fixed::sub(pre, omega_fp);
        post = fixed::add(post, omega_fp);
    }
    Err(Error::NoAdmissibleM { level: n })
}

// ---------------------------------------------------------------------
// quantitative bounds
// ---------------------------------------------------------------------

/// `c~(a) = (2a/(a-1)) sum_{l>=1} l^2 a^(-l+1)`, summed to relative
/// error 1e-12 (requires a > 1).
pub fn c_tilde(a: f64) -> Result<f64> {
    if a <= 1.0 {
        return Err(Error::HypothesisViolation(format!(
            "c~ argument {a} must exceed 1 for the series to converge"
        )));
    }
    let mut sum = 0.0f64;
    for l in 1..100_000u64 {
        let lf = l as f64;
        let term = lf * lf * math::powf(a, -(lf - 1.0));
        sum += term;
        if term < 1e-13 * sum {
            break;
        }
    }
    Ok(2.0 * a / (a - 1.0) * sum)
}

/// `c(alpha, b) = 6 c~(alpha^(2b/p - 5(1-b)p)) + 5 c~(alpha^(2b/p - 2(1-b)p))`.
fn c_of(alpha: f64, b: f64, p: f64) -> Result<(f64, f64, f64)> {
    let a1 = math::powf(alpha, 2.0 * b / p - 2.0 * (1.0 - b) * p);
    let a2 = math::powf(alpha, 2.0 * b / p - 5.0 * (1.0 - b) * p);
    let ct1 = c_tilde(a1)?;
    let ct2 = c_tilde(a2)?;
    Ok((ct1, ct2, 6.0 * ct2 + 5.0 * ct1))
}

/// Symbolic bounds vs measured counterparts at one induction level.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub level: usize,
    pub beta: f64,
    pub b_n: f64,
    pub m_n: usize,
    pub k_n: u64,
    /// Measured strip heights.
    pub h_phi: f64,
    pub h_psi: f64,
    /// Lemma height-of-strips bounds.
    pub h_phi_bound: f64,
    pub h_psi_bound: f64,
    /// Measured curvature gaps.
    pub nu_measured: f64,
    pub nu_plus_measured: f64,
    /// Lemma nu_n lower bound `s - S^2 c alpha^-(2b/p - 5(1-b)p)`.
    pub nu_lower: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub c_tilde_1: f64,
    pub c_tilde_2: f64,
    pub c_of_alpha_b: f64,
    /// Refined-theorem nu with b_1^2 in place of b_n.
    pub nu_refined: f64,
    /// `2 |I_0| < C (2 K_0 M_0)^(-eta)`.
    pub i0_smallness_ok: bool,
    /// Width of I_{n+1} if computed, and the geometric bound
    /// `sqrt(8) sqrt((H_phi + H_psi) / nu_measured)`.
    pub next_region_width: Option<f64>,
    pub geometric_bound: f64,
}

/// Compute every symbolic bound in closed form and measure the empirical
/// counterparts on the level-n strips.
pub fn bounds_report(
    fam: &Family,
    strip: &Strip,
    rot: &RotationSpec,
    schedule: &Schedule,
    regions: &[CriticalRegion],
    n: usize,
    grid: usize,
) -> Result<BoundsReport> {
    if regions.len() <= n {
        return Err(Error::InvalidSchedule(format!(
            "need regions up to level {n}, have {}",
            regions.len()
        )));
    }
    let beta = regions[n].beta;
    let b_n = schedule.b(n);
    let p = strip.p;
    let hypo = 5.0 * p * p / (2.0 + 5.0 * p * p);
    if b_n <= hypo {
        return Err(Error::HypothesisViolation(format!(
            "b_n = {b_n:.6} must exceed 5p^2/(2+5p^2) = {hypo:.6}"
        )));
    }
    let m_n = schedule.m(n)?;
    let k_n = schedule.k(n);

    let samples = strip_samples_for_region(fam, strip, rot.omega, beta, &regions[n], m_n, grid)?;
    let h_phi = samples.h_phi();
    let h_psi = samples.h_psi();
    let nu_measured = samples.nu_minus();
    let nu_plus_measured = samples.nu_plus();

    let contraction = math::powf(strip.alpha_c, b_n) * math::powf(strip.alpha_u, 1.0 - b_n);
    let expansion = math::powf(strip.alpha_e, b_n) * math::powf(strip.alpha_l, 1.0 - b_n);
    let h_phi_bound = math::powf(contraction, m_n as f64) * strip.c_width();
    let h_psi_bound = math::powf(expansion, -(m_n as f64)) * strip.e_width();

    let alpha1 = math::powf(strip.alpha, 2.0 * b_n / p - 2.0 * (1.0 - b_n) * p);
    let alpha2 = math::powf(strip.alpha, 2.0 * b_n / p - 5.0 * (1.0 - b_n) * p);
    let (c_tilde_1, c_tilde_2, c_of_alpha_b) = c_of(strip.alpha, b_n, p)?;
    let nu_lower = strip.s - strip.big_s * strip.big_s * c_of_alpha_b / alpha2;

    let b1 = 1.0 - 1.0 / schedule.k0 as f64;
    let b1sq = b1 * b1;
    let (_, _, c_ref) = c_of(strip.alpha, b1sq, p)?;
    let nu_refined = strip.s
        - c_ref
            * strip.big_s
            * strip.big_s
            * math::powf(strip.alpha, -(2.0 * b1sq / p - 5.0 * (1.0 - b1sq) * p));

    let m0 = schedule.m(0)? as f64;
    let i0_smallness_ok = 2.0 * regions[0].width()
        < rot.dio_c * math::powf(2.0 * schedule.k0 as f64 * m0, -rot.dio_eta);

    let geometric_bound = if nu_measured > 0.0 {
        math::sqrt(8.0) * math::sqrt((h_phi + h_psi) / nu_measured)
    } else {
        f64::INFINITY
    };
    let next_region_width = regions.get(n + 1).map(|r| r.width());

    Ok(BoundsReport {
        level: n,
        beta,
        b_n,
        m_n,
        k_n,
        h_phi,
        h_psi,
        h_phi_bound,
        h_psi_bound,
        nu_measured,
        nu_plus_measured,
        nu_lower,
        alpha1,
        alpha2,
        c_tilde_1,
        c_tilde_2,
        c_of_alpha_b,
        nu_refined,
        i0_smallness_ok,
        next_region_width,
        geometric_bound,
    })
}

// ---------------------------------------------------------------------
// brute-force oracle for the region construction
// ---------------------------------------------------------------------

/// Membership of `I_{n+1}` per grid cell by direct interval-image
/// iteration: forward image of the full fibre interval C after M-1
/// steps, backward image of E after M+1 steps, intersection test.
/// Monotone fibre maps carry intervals to intervals, so endpoint orbits
/// suffice. Independent of the sublevel-set path used by `next_region`.
pub fn next_region_brute_force(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    region: &CriticalRegion,
    m: usize,
    grid: usize,
) -> Result<Vec<bool>> {
    let mut members = alloc::vec![false; grid];
    let arc = match region.arc {
        Some(a) => a,
        None => return Ok(members),
    };
    for (i, slot) in members.iter_mut().enumerate() {
        let theta = i as f64 / grid as f64;
        if !arc.contains(theta) {
            continue;
        }
        // forward: interval image of {theta - (m-1) omega} x C after m-1 steps
        let start = reduce(theta - (m as f64 - 1.0) * omega);
        let mut a_lo = strip.c_minus;
        let mut a_hi = strip.c_plus;
        let mut ok = true;
        for k in 0..(m - 1) {
            let base = reduce(start + k as f64 * omega);
            match (fam.eval(beta, base, a_lo), fam.eval(beta, base, a_hi)) {
                (Ok(lo), Ok(hi)) => {
                    a_lo = lo;
                    a_hi = hi;
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        // backward: interval image of {theta + (m+1) omega} x E after m+1
        // steps. A missing e+ preimage sends the interval top to +inf; a
        // missing e- preimage empties the whole backward column.
        let mut b_lo = strip.e_minus;
        let mut b_hi = strip.e_plus;
        let mut hi_unbounded = false;
        for k in 0..(m + 1) {
            let fibre_base = reduce(theta + (m as f64 - k as f64) * omega);
            match fam.inverse_at(beta, fibre_base, b_lo) {
                Ok(lo) => b_lo = lo,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
            if !hi_unbounded {
                match fam.inverse_at(beta, fibre_base, b_hi) {
                    Ok(hi) => b_hi = hi,
                    Err(Error::NoPreimage { .. }) => hi_unbounded = true,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if !ok {
            continue;
        }
        *slot = (hi_unbounded || a_lo <= b_hi) && b_lo <= a_hi;
    }
    Ok(members)
}

// ---------------------------------------------------------------------
// orbit diagnostics (proof-internal counters, exposed opportunistically)
// ---------------------------------------------------------------------

/// Counts of contracting/expanding residence along a finite orbit:
/// `p` counts steps with x in C and theta outside I_0, `q` the backward
/// analogue (x in E, theta outside I_0 + omega).
#[derive(Clone, Copy, Debug, Default)]
pub struct RegionCounts {
    pub p: usize,
    pub q: usize,
    pub steps: usize,
}

pub fn orbit_region_counts(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    i0: &Arc,
    theta: f64,
    x: f64,
    n: usize,
) -> Result<RegionCounts> {
    let mut counts = RegionCounts { steps: n, ..Default::default() };
    let mut xf = x;
    for l in 0..n {
        let base = reduce(theta + l as f64 * omega);
        if xf >= strip.c_minus && xf <= strip.c_plus && !i0.contains(base) {
            counts.p += 1;
        }
        xf = fam.eval(beta, base, xf)?;
    }
    let shifted = i0.translate(omega);
    let mut xb = x;
    for l in 0..n {
        let here = reduce(theta - l as f64 * omega);
        if xb >= strip.e_minus && xb <= strip.e_plus && !shifted.contains(here) {
            counts.q += 1;
        }
        let fibre_base = reduce(here - omega);
        xb = fam.inverse_at(beta, fibre_base, xb)?;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::circle_dist;

    const FRAC_PI_2: f64 = core::f64::consts::FRAC_PI_2;

    fn quarter_pi_strip_r10() -> Strip {
        // the section-3 worked configuration: r = 10, c- = 0.5, p = 3
        Strip::new(0.0, 0.1, 0.5, FRAC_PI_2, 100.0, 3.0, 5.0, 5.6).unwrap()
    }

    #[test]
    fn i0_matches_closed_form_arccos() {
        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let strip = quarter_pi_strip_r10();
        let beta = 0.95;
        let region = critical_region0(&fam, &strip, beta).unwrap();
        let arc = region.arc.unwrap();
        // cos(2 pi theta) >= (4/pi)(arctan r - c-)/beta - 1
        let thr = 4.0 / core::f64::consts::PI * (libm::atan(10.0) - 0.5) / beta - 1.0;
        let half = libm::acos(thr) / core::f64::consts::TAU;
        assert!((arc.half_width() - half).abs() < 1e-9, "{} vs {half}", arc.half_width());
        assert!(circle_dist(arc.center(), 0.0) < 1e-9);
    }

    #[test]
    fn i0_empty_when_beta_small() {
        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let strip = quarter_pi_strip_r10();
        let region = critical_region0(&fam, &strip, 0.3).unwrap();
        assert!(region.arc.is_none());
    }

    #[test]
    fn i0_grows_with_beta() {
        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let strip = quarter_pi_strip_r10();
        let mut prev: Option<Arc> = None;
        for i in 0..20 {
            let beta = 0.7 + 0.012 * i as f64;
            let region = critical_region0(&fam, &strip, beta).unwrap();
            if let (Some(p), Some(c)) = (prev, region.arc) {
                assert!(
                    c.half_width() + 1e-9 >= p.half_width(),
                    "I_0 shrank from {} to {} at beta={beta}",
                    p.half_width(),
                    c.half_width()
                );
            }
            if region.arc.is_some() {
                prev = region.arc;
            }
        }
    }

    #[test]
    fn beta_bounds_quarter_pi() {
        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let strip = quarter_pi_strip_r10();
        let (lo, hi) = beta_bounds0(&fam, &strip).unwrap();
        // closed forms: drive max is at theta = 0 where 1 + cos = 2
        let expect_hi = (libm::atan(100.0 * FRAC_PI_2) - 0.0) / FRAC_PI_2;
        let expect_lo = (libm::atan(50.0) - 0.1) / FRAC_PI_2;
        assert!((hi - expect_hi).abs() < 1e-9, "{hi} vs {expect_hi}");
        assert!((lo - expect_lo).abs() < 1e-9, "{lo} vs {expect_lo}");
        assert!(lo <= hi);
    }

    #[test]
    fn beta_bounds_error_without_forcing() {
        // theta-independent family: f(c+) never reaches e- on [0,1]
        let fam = crate::family::affine_family(0.5, 0.0, 0.0);
        let strip = Strip::new(-4.0, -0.5, 0.0, 4.0, 8.0, 2.0, 1.0, 10.0).unwrap();
        assert!(matches!(beta_bounds0(&fam, &strip), Err(Error::NotFound(_))));
    }

    #[test]
    fn schedule_validation() {
        let strip = quarter_pi_strip_r10();
        assert!(Schedule::new(1, 64, 2, &strip).is_err());
        assert!(Schedule::new(4, 8, 2, &strip).is_err(), "sum 1/K too large");
        let s = Schedule::new(4, 64, 2, &strip).unwrap();
        assert_eq!(s.k(2), 256);
        assert!((s.b(1) - (1.0 - 1.0 / 64.0)).abs() < 1e-15);
        assert_eq!(s.window(1).unwrap(), (256, 512));
        assert!(s.b_inf > 0.96 && s.b_inf < 1.0);
    }

    #[test]
    fn b1_is_0_9_for_k0_10() {
        // b_1 = (1 - 1/K_0) b_0 with K_0 = 10; bypass the sum-1/6 gate
        // by computing the recursion directly
        let strip = quarter_pi_strip_r10();
        let s = Schedule { m: alloc::vec![4], k0: 10, kappa: 2, b_inf: 0.0, alpha_minus: 0.0, alpha_plus: 0.0 };
        let _ = &strip;
        assert!((s.b(1) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn c_tilde_of_2_is_48() {
        assert!((c_tilde(2.0).unwrap() - 48.0).abs() < 1e-9);
        assert!(c_tilde(1.0).is_err());
        assert!(c_tilde(0.5).is_err());
    }
}
