//! Critical-parameter location and smooth/non-smooth classification.
//!
//! "No invariant graph" is operationalised as pullback escape below e-
//! within a finite horizon; monotonicity in beta makes the escape
//! predicate bisectable. Finite N can only overestimate beta_c, and the
//! grid enters only through the theta-discretisation of the escape test.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{Family, Strip};
use crate::graphs::{self, GraphSample, PinchStats, ESCAPE_EPS};
use crate::math;
use crate::regions;
use crate::torus::reduce;

const TAU: f64 = core::f64::consts::TAU;

/// "Lyapunov exponent bounded away from zero" threshold for the
/// classifier (heuristic, reported alongside results).
pub const LYAP_DELTA: f64 = 0.05;

/// Steps of the finite-time sink-source diagnostic at the pinch point.
/// The probe sits a little below beta_c, so the candidate rides the
/// expanding/contracting windows only for a few steps before peeling
/// off to the attractor (forward) and repeller (backward); the window
/// length is ~ log(gap)/lambda, about 4 steps at the default probe.
pub const SINK_SOURCE_STEPS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Smooth,
    NonSmooth,
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct Evidence {
    pub probe_beta: f64,
    pub lyap_attractor: f64,
    pub lyap_repeller: f64,
    pub pinch: PinchStats,
    /// (forward, backward) finite-time exponents at the candidate point.
    pub sink_source: (f64, f64),
    pub candidate_theta: f64,
    pub candidate_x: f64,
    pub sink_source_steps: usize,
    /// Thresholds the labels were derived from.
    pub lyap_delta: f64,
    pub eps_pinch: f64,
}

#[derive(Clone, Debug)]
pub struct BifurcationResult {
    pub beta_c: f64,
    pub classification: Classification,
    pub evidence: Evidence,
}

#[derive(Clone, Copy, Debug)]
pub struct BetaCSearch {
    pub beta_c: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// B(0) used as the initial bracket.
    pub beta_window: (f64, f64),
}

// ---------------------------------------------------------------------
// escape predicate
// ---------------------------------------------------------------------

const LANES: usize = 8;
const RESYNC: usize = 4096;

/// Does the N-step pullback of c+ drop below e- within `n_max` steps for
/// some grid point? Equivalently: some forward orbit started on the grid
/// at x = c+ crosses the escape threshold. Each orbit is exact; the
/// drive's cos/sin pair advances by rotation recurrence and resyncs
/// every few thousand steps, which only the escape margin sees (the
/// verdict is far less sensitive than the bisection tolerance).
fn escape_scan_cos_drive(
    alpha: f64,
    drive_scale: f64,
    floor: f64,
    start: f64,
    omega: f64,
    beta: f64,
    n_max: usize,
    g: usize,
) -> bool {
    let (sw, cw) = math::sincos(TAU * omega);
    let chunk = |i0: usize| -> bool {
        let mut x = [start; LANES];
        let mut c = [0.0f64; LANES];
        let mut s = [0.0f64; LANES];
        let mut theta = [0.0f64; LANES];
        for l in 0..LANES {
            let i = (i0 + l).min(g - 1);
            theta[l] = i as f64 / g as f64;
            let (sn, cs) = math::sincos(TAU * theta[l]);
            c[l] = cs;
            s[l] = sn;
        }
        for k in 0..n_max {
            if k > 0 && k % RESYNC == 0 {
                for l in 0..LANES {
                    let base = reduce(theta[l] + k as f64 * omega);
                    let (sn, cs) = math::sincos(TAU * base);
                    c[l] = cs;
                    s[l] = sn;
                }
            }
            let mut low = false;
            for l in 0..LANES {
                let z = alpha * x[l];
                x[l] = math::atan_hybrid(z) - beta * drive_scale * (1.0 + c[l]);
                low |= x[l] < floor;
                let c2 = c[l] * cw - s[l] * sw;
                let s2 = s[l] * cw + c[l] * sw;
                c[l] = c2;
                s[l] = s2;
            }
            if low {
                return true;
            }
        }
        false
    };
    let starts: Vec<usize> = (0..g).step_by(LANES).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts.par_iter().any(|&i0| chunk(i0))
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.iter().any(|&i0| chunk(i0))
    }
}

fn escape_scan_generic(
    fam: &Family,
    floor: f64,
    start: f64,
    omega: f64,
    beta: f64,
    n_max: usize,
    g: usize,
) -> bool {
    let orbit_escapes = |i: usize| -> bool {
        let theta = i as f64 / g as f64;
        let mut x = start;
        for k in 0..n_max {
            let base = reduce(theta + k as f64 * omega);
            match fam.eval(beta, base, x) {
                Ok(v) => x = v,
                Err(_) => return true, // left the family domain entirely
            }
            if x < floor {
                return true;
            }
        }
        false
    };
    let idx: Vec<usize> = (0..g).collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        idx.par_iter().any(|&i| orbit_escapes(i))
    }
    #[cfg(not(feature = "parallel"))]
    {
        idx.iter().any(|&i| orbit_escapes(i))
    }
}

/// Escape predicate used by the beta_c bisection.
pub fn escape_within(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n_max: usize,
    g: usize,
) -> bool {
    let floor = strip.e_minus - ESCAPE_EPS;
    let start = strip.c_plus;
    match fam {
        Family::ArctanIntro { alpha } => {
            escape_scan_cos_drive(*alpha, 1.0, floor, start, omega, beta, n_max, g)
        }
        Family::ArctanQuarterPi { alpha } => escape_scan_cos_drive(
            *alpha,
            core::f64::consts::FRAC_PI_4,
            floor,
            start,
            omega,
            beta,
            n_max,
            g,
        ),
        _ => escape_scan_generic(fam, floor, start, omega, beta, n_max, g),
    }
}

/// Bisect the escape predicate over B(0) to bracket width <= tol.
///
/// Invariant maintained throughout: the lower endpoint never escapes,
/// the upper endpoint always escapes.
pub fn bisect_beta_c(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    tol: f64,
    n_max: usize,
    g: usize,
) -> Result<BetaCSearch> {
    assert!(tol > 0.0, "tolerance must be positive");
    let window = regions::beta_bounds0(fam, strip)?;
    let (mut lo, mut hi) = window;
    if escape_within(fam, strip, omega, lo, n_max, g) {
        return Err(Error::PredicateConstant { escapes_at_lower: true });
    }
    if !escape_within(fam, strip, omega, hi, n_max, g) {
        return Err(Error::PredicateConstant { escapes_at_lower: false });
    }
    let mut iterations = 0;
    while hi - lo > tol && iterations < 100 {
        let mid = 0.5 * (lo + hi);
        if escape_within(fam, strip, omega, mid, n_max, g) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(BetaCSearch { beta_c: 0.5 * (lo + hi), bracket: (lo, hi), iterations, beta_window: window })
}

// ---------------------------------------------------------------------
// classification
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ClassifyParams {
    /// Probe offset below beta_c; None = 1e-4 * |B(0)|.
    pub delta_probe: Option<f64>,
    pub n: usize,
    pub g: usize,
    pub sink_source_steps: usize,
    pub lyap_delta: f64,
    /// None = 1e-3 * (c+ - e-).
    pub eps_pinch: Option<f64>,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self {
            delta_probe: None,
            n: 10_000,
            g: 1 << 14,
            sink_source_steps: SINK_SOURCE_STEPS,
            lyap_delta: LYAP_DELTA,
            eps_pinch: None,
        }
    }
}

/// Classify the bifurcation at `beta_c` by probing just below it:
/// NonSmooth when the Lyapunov exponents stay bounded away from 0 while
/// the graphs pinch; Smooth when both exponents vanish with the gap.
/// Thresholds are heuristics and are reported with the result.
pub fn classify(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta_c: f64,
    params: &ClassifyParams,
) -> Result<BifurcationResult> {
    let (b_lo, b_hi) = regions::beta_bounds0(fam, strip)?;
    let delta = params.delta_probe.unwrap_or(1e-4 * (b_hi - b_lo));
    let probe = beta_c - delta;
    if probe <= b_lo {
        return Err(Error::EmptyInterval("classification probe fell below beta_-(0)"));
    }
    let mut attractor = graphs::pullback_attractor(fam, strip, omega, probe, params.n, params.g);
    if attractor.is_absent() {
        return Err(Error::AbsentGraph { escaped: attractor.escaped.len() });
    }
    let mut repeller = graphs::pushforward_repeller(fam, strip, omega, probe, params.n, params.g);
    if repeller.is_absent() {
        return Err(Error::AbsentGraph { escaped: repeller.escaped.len() });
    }
    let lyap_attractor = graphs::lyapunov(fam, &mut attractor)?;
    let lyap_repeller = graphs::lyapunov(fam, &mut repeller)?;
    let pinch = graphs::pinching(&attractor, &repeller)?;

    // sink-source candidate: midpoint of the smallest gap, where forward
    // expansion and backward contraction windows coexist
    let theta_star = pinch.argmin_theta;
    let idx = (theta_star * params.g as f64) as usize % params.g;
    let x_star = 0.5 * (attractor.values[idx] + repeller.values[idx]);
    let sink_source = graphs::finite_time_exponents(
        fam,
        omega,
        probe,
        theta_star,
        x_star,
        params.sink_source_steps,
    )?;

    let eps_pinch = params.eps_pinch.unwrap_or(1e-3 * strip.width());
    let delta_l = params.lyap_delta;
    let classification = if lyap_attractor < -delta_l
        && lyap_repeller > delta_l
        && pinch.min_gap < eps_pinch
        && pinch.max_gap > eps_pinch
    {
        Classification::NonSmooth
    } else if math::abs(lyap_attractor) <= delta_l && math::abs(lyap_repeller) <= delta_l {
        Classification::Smooth
    } else {
        Classification::Undetermined
    };

    Ok(BifurcationResult {
        beta_c,
        classification,
        evidence: Evidence {
            probe_beta: probe,
            lyap_attractor,
            lyap_repeller,
            pinch,
            sink_source,
            candidate_theta: theta_star,
            candidate_x: x_star,
            sink_source_steps: params.sink_source_steps,
            lyap_delta: delta_l,
            eps_pinch,
        },
    })
}

// ---------------------------------------------------------------------
// sweeps and figure bundles
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub beta: f64,
    pub lyap_plus: Option<f64>,
    pub lyap_minus: Option<f64>,
    pub min_gap: Option<f64>,
    pub escaped: bool,
}

/// Graph diagnostics per beta; rows where either graph is absent are
/// flagged escaped instead of erroring.
pub fn sweep(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    betas: &[f64],
    n: usize,
    g: usize,
) -> Vec<SweepRow> {
    let row = |&beta: &f64| -> SweepRow {
        let mut attractor = graphs::pullback_attractor(fam, strip, omega, beta, n, g);
        let mut repeller = graphs::pushforward_repeller(fam, strip, omega, beta, n, g);
        if attractor.is_absent() || repeller.is_absent() {
            return SweepRow { beta, lyap_plus: None, lyap_minus: None, min_gap: None, escaped: true };
        }
        let lp = graphs::lyapunov(fam, &mut attractor).ok();
        let lm = graphs::lyapunov(fam, &mut repeller).ok();
        let gap = graphs::pinching(&attractor, &repeller).ok().map(|p| p.min_gap);
        SweepRow { beta, lyap_plus: lp, lyap_minus: lm, min_gap: gap, escaped: false }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        betas.par_iter().map(row).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        betas.iter().map(row).collect()
    }
}

/// One Figure-1 panel: both graphs plus pinch statistics.
pub fn figure_data(
    fam: &Family,
    strip: &Strip,
    omega: f64,
    beta: f64,
    n: usize,
    g: usize,
) -> Result<(GraphSample, GraphSample, PinchStats)> {
    let mut attractor = graphs::pullback_attractor(fam, strip, omega, beta, n, g);
    if attractor.is_absent() {
        return Err(Error::AbsentGraph { escaped: attractor.escaped.len() });
    }
    let mut repeller = graphs::pushforward_repeller(fam, strip, omega, beta, n, g);
    if repeller.is_absent() {
        return Err(Error::AbsentGraph { escaped: repeller.escaped.len() });
    }
    graphs::lyapunov(fam, &mut attractor)?;
    graphs::lyapunov(fam, &mut repeller)?;
    let pinch = graphs::pinching(&attractor, &repeller)?;
    Ok((attractor, repeller, pinch))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn intro_strip() -> Strip {
        Strip::new(-0.026, 0.026, 0.4, core::f64::consts::FRAC_PI_2, 100.0, 12.0, 0.4, 6.4)
            .unwrap()
    }

    #[test]
    fn escape_predicate_brackets_beta_c() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        // far below beta_c: no escape even with a generous horizon
        assert!(!escape_within(&fam, &strip, GOLDEN, 0.76, 20_000, 512));
        // beyond beta_+(0): immediate escape
        assert!(escape_within(&fam, &strip, GOLDEN, 0.80, 20_000, 512));
    }

    #[test]
    fn specialized_and_generic_scans_agree() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        for &beta in &[0.75, 0.778, 0.782, 0.80] {
            let fast = escape_within(&fam, &strip, GOLDEN, beta, 4_000, 128);
            let slow = escape_scan_generic(
                &fam,
                strip.e_minus - ESCAPE_EPS,
                strip.c_plus,
                GOLDEN,
                beta,
                4_000,
                128,
            );
            assert_eq!(fast, slow, "beta={beta}");
        }
    }

    #[test]
    fn autonomous_fold_is_found_and_smooth() {
        // f = arctan(4x) - 2 beta, no theta dependence: the fold is at
        // beta_c = (atan(sqrt(3)) - sqrt(3)/4) / 2 (solve f(x)=x, f'(x)=1)
        let omega = GOLDEN;
        let s = |src: &str| crate::expr::Expr::parse(src, omega).unwrap();
        let fam = Family::Custom(crate::family::CustomFamily {
            f: s("arctan(4*x) - 2*beta"),
            fx: s("4/(1 + 16*x^2)"),
            fxx: s("-128*x/(1 + 16*x^2)^2"),
            ftheta: s("0"),
            ftheta2: s("0"),
            fthetax: s("0"),
            fbeta: s("-2"),
            domain: (-100.0, 100.0),
        });
        // C must contain the merging pair (fold at x ~ 0.433) and the
        // beta window [beta_-(0), beta_+(0)] must bracket the fold value
        let strip = Strip::new(-0.3, 0.05, 0.18, 1.45, 4.0, 2.0, 1.0, 10.0).unwrap();
        let expect = (math::atan(math::sqrt(3.0)) - math::sqrt(3.0) / 4.0) / 2.0;
        let found = bisect_beta_c(&fam, &strip, omega, 1e-6, 40_000, 8).unwrap();
        assert!(
            (found.beta_c - expect).abs() < 2e-4,
            "beta_c {} vs fold {expect}",
            found.beta_c
        );
        let result = classify(
            &fam,
            &strip,
            omega,
            found.beta_c,
            &ClassifyParams { n: 4000, g: 64, delta_probe: Some(2e-5), ..Default::default() },
        )
        .unwrap();
        assert_eq!(result.classification, Classification::Smooth, "{:?}", result.evidence);
    }

    #[test]
    fn sweep_flags_escaped_rows() {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let strip = intro_strip();
        let rows = sweep(&fam, &strip, GOLDEN, &[0.0, 0.77, 0.9], 400, 128);
        assert!(!rows[0].escaped);
        assert!(rows[0].lyap_plus.unwrap() < -5.0);
        assert!((rows[0].lyap_minus.unwrap() - math::ln(100.0)).abs() < 1e-6);
        assert!(!rows[1].escaped);
        assert!(rows[2].escaped);
        assert!(rows[2].lyap_plus.is_none());
    }
}
