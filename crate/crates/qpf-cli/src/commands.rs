//! Subcommand implementations. Exit codes: 0 success, 1 analysis-level
//! failure, 2 configuration failure.

use std::path::PathBuf;

use serde::Serialize;

use qpf_core::bifurcation::{self, Classification, ClassifyParams};
use qpf_core::regions::{self, Schedule};
use qpf_core::{graphs, Error as CoreError};

use crate::config::Resolved;
use crate::formats::{self, BoundsJson, PinchJson};
use crate::plot;

pub struct Ctx {
    pub resolved: Resolved,
    pub out_dir: PathBuf,
    /// None when --no-timestamp was passed (byte-identical reruns).
    pub timestamp: Option<u64>,
    pub beta: Option<f64>,
    pub png: bool,
    pub binary: bool,
}

impl Ctx {
    fn beta_or(&self, what: &str) -> Result<f64, i32> {
        match self.beta.or(self.resolved.config.beta) {
            Some(b) => Ok(b),
            None => {
                eprintln!("error: {what} needs --beta (or a 'beta' field in the config)");
                Err(2)
            }
        }
    }
}

fn analysis_error(e: &CoreError) -> i32 {
    eprintln!("analysis error: {e}");
    1
}

fn io_fail(e: std::io::Error) -> i32 {
    eprintln!("io error: {e}");
    1
}

// ---------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct AssumptionJson {
    id: String,
    description: String,
    passed: bool,
    margin: f64,
    witness_beta: f64,
    witness_theta: f64,
    witness_x: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    family: String,
    all_passed: bool,
    grid_theta: usize,
    grid_x: usize,
    grid_beta: usize,
    refinements: usize,
    checks: Vec<AssumptionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

pub fn cmd_verify(ctx: &Ctx) -> i32 {
    let r = &ctx.resolved;
    let grid = qpf_core::GridSpec {
        theta: r.config.verify_grid.theta,
        x: r.config.verify_grid.x,
        beta: r.config.verify_grid.beta,
        max_refinements: r.config.verify_grid.max_refinements,
    };
    let report = match qpf_core::family::verify_assumptions(&r.family, &r.strip, &r.rotation, &grid)
    {
        Ok(rep) => rep,
        Err(e) => return analysis_error(&e),
    };
    for c in &report.checks {
        println!(
            "{:<4} {} margin {:+.6e} at (beta {:.4}, theta {:.4}, x {:.4}) -- {}",
            c.id,
            if c.passed { "pass" } else { "FAIL" },
            c.margin,
            c.witness.0,
            c.witness.1,
            c.witness.2,
            c.description
        );
    }
    let json = VerifyReport {
        family: r.family.kind_name().to_string(),
        all_passed: report.all_passed(),
        grid_theta: report.grid.0,
        grid_x: report.grid.1,
        grid_beta: report.grid.2,
        refinements: report.refinements,
        checks: report
            .checks
            .iter()
            .map(|c| AssumptionJson {
                id: c.id.to_string(),
                description: c.description.to_string(),
                passed: c.passed,
                margin: c.margin,
                witness_beta: c.witness.0,
                witness_theta: c.witness.1,
                witness_x: c.witness.2,
            })
            .collect(),
        generated_at_unix: ctx.timestamp,
    };
    if let Err(e) = formats::write_json(&ctx.out_dir, "assumptions.json", &json) {
        return io_fail(e);
    }
    if json.all_passed {
        println!("all assumptions hold");
        0
    } else {
        println!("assumption suite FAILED");
        1
    }
}

// ---------------------------------------------------------------------
// graphs / figure
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct GraphsReport {
    beta: f64,
    n: usize,
    g: usize,
    escaped: bool,
    escaped_attractor_points: usize,
    escaped_repeller_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov_attractor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lyapunov_repeller: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pinch: Option<PinchJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

fn graphs_impl(ctx: &Ctx, beta: f64, prefix: &str) -> i32 {
    let r = &ctx.resolved;
    let (n, g) = (r.config.grids.n, r.config.grids.g);
    let mut attractor =
        graphs::pullback_attractor(&r.family, &r.strip, r.rotation.omega, beta, n, g);
    let mut repeller =
        graphs::pushforward_repeller(&r.family, &r.strip, r.rotation.omega, beta, n, g);

    if let Err(e) = formats::write_file(
        &ctx.out_dir,
        &format!("{prefix}attractor.csv"),
        formats::graph_to_csv(&attractor).as_bytes(),
    ) {
        return io_fail(e);
    }
    if let Err(e) = formats::write_file(
        &ctx.out_dir,
        &format!("{prefix}repeller.csv"),
        formats::graph_to_csv(&repeller).as_bytes(),
    ) {
        return io_fail(e);
    }
    if ctx.binary {
        let _ = formats::write_file(
            &ctx.out_dir,
            &format!("{prefix}attractor.qpfg"),
            &formats::graph_to_binary(&attractor),
        );
        let _ = formats::write_file(
            &ctx.out_dir,
            &format!("{prefix}repeller.qpfg"),
            &formats::graph_to_binary(&repeller),
        );
    }
    if ctx.png {
        let img = plot::render_graphs(&attractor, &repeller);
        if let Err(e) = plot::save_png(&img, &ctx.out_dir, &format!("{prefix}graphs.png")) {
            eprintln!("png error: {e}");
        }
    }

    let absent = attractor.is_absent() || repeller.is_absent();
    let (la, lr, pinch) = if absent {
        (None, None, None)
    } else {
        let la = graphs::lyapunov(&r.family, &mut attractor).ok();
        let lr = graphs::lyapunov(&r.family, &mut repeller).ok();
        let pinch = graphs::pinching(&attractor, &repeller).ok();
        (la, lr, pinch)
    };
    let report = GraphsReport {
        beta,
        n,
        g,
        escaped: absent,
        escaped_attractor_points: attractor.escaped.len(),
        escaped_repeller_points: repeller.escaped.len(),
        lyapunov_attractor: la,
        lyapunov_repeller: lr,
        pinch: pinch.as_ref().map(PinchJson::from),
        generated_at_unix: ctx.timestamp,
    };
    if let Err(e) = formats::write_json(&ctx.out_dir, &format!("{prefix}pinch.json"), &report) {
        return io_fail(e);
    }
    if absent {
        eprintln!(
            "graphs absent at beta = {beta}: {} attractor / {} repeller points escaped",
            attractor.escaped.len(),
            repeller.escaped.len()
        );
        return 1;
    }
    println!(
        "beta {beta}: lyap+ {:.6} lyap- {:.6} min_gap {:.6e} max_gap {:.6e}",
        la.unwrap_or(f64::NAN),
        lr.unwrap_or(f64::NAN),
        report.pinch.as_ref().map(|p| p.min_gap).unwrap_or(f64::NAN),
        report.pinch.as_ref().map(|p| p.max_gap).unwrap_or(f64::NAN),
    );
    0
}

pub fn cmd_graphs(ctx: &Ctx) -> i32 {
    match ctx.beta_or("graphs") {
        Ok(beta) => graphs_impl(ctx, beta, ""),
        Err(code) => code,
    }
}

pub fn cmd_figure(ctx: &Ctx) -> i32 {
    match ctx.beta_or("figure") {
        Ok(beta) => graphs_impl(ctx, beta, "figure_"),
        Err(code) => code,
    }
}

// ---------------------------------------------------------------------
// bisect
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct EvidenceJson {
    probe_beta: f64,
    lyap_attractor: f64,
    lyap_repeller: f64,
    pinch: PinchJson,
    sink_source_forward: f64,
    sink_source_backward: f64,
    candidate_theta: f64,
    candidate_x: f64,
    sink_source_steps: usize,
    lyap_delta: f64,
    eps_pinch: f64,
}

#[derive(Serialize)]
struct BisectReport {
    beta_c: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    beta_window_lo: f64,
    beta_window_hi: f64,
    iterations: usize,
    n_max: usize,
    g: usize,
    tol: f64,
    classification: String,
    evidence: EvidenceJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

pub fn cmd_bisect(ctx: &Ctx) -> i32 {
    let r = &ctx.resolved;
    let search = match bifurcation::bisect_beta_c(
        &r.family,
        &r.strip,
        r.rotation.omega,
        r.config.tolerances.beta_tol,
        r.config.grids.n_max,
        r.config.grids.g,
    ) {
        Ok(s) => s,
        Err(e) => return analysis_error(&e),
    };
    let params = ClassifyParams {
        delta_probe: r.config.classify.delta_probe,
        n: r.config.grids.n,
        g: r.config.grids.g,
        sink_source_steps: r
            .config
            .classify
            .sink_source_steps
            .unwrap_or(bifurcation::SINK_SOURCE_STEPS),
        lyap_delta: r.config.classify.lyap_delta.unwrap_or(bifurcation::LYAP_DELTA),
        eps_pinch: r.config.classify.eps_pinch,
    };
    let result =
        match bifurcation::classify(&r.family, &r.strip, r.rotation.omega, search.beta_c, &params)
        {
            Ok(res) => res,
            Err(e) => return analysis_error(&e),
        };
    let class = match result.classification {
        Classification::Smooth => "Smooth",
        Classification::NonSmooth => "NonSmooth",
        Classification::Undetermined => "Undetermined",
    };
    println!(
        "beta_c = {:.7} (bracket [{:.7}, {:.7}], {} iterations): {}",
        search.beta_c, search.bracket.0, search.bracket.1, search.iterations, class
    );
    let ev = &result.evidence;
    println!(
        "  probe {:.7}: lyap+ {:.4} lyap- {:.4} min_gap {:.3e} max_gap {:.3e} sink-source ({:.3}, {:.3})",
        ev.probe_beta,
        ev.lyap_attractor,
        ev.lyap_repeller,
        ev.pinch.min_gap,
        ev.pinch.max_gap,
        ev.sink_source.0,
        ev.sink_source.1
    );
    let report = BisectReport {
        beta_c: search.beta_c,
        bracket_lo: search.bracket.0,
        bracket_hi: search.bracket.1,
        beta_window_lo: search.beta_window.0,
        beta_window_hi: search.beta_window.1,
        iterations: search.iterations,
        n_max: r.config.grids.n_max,
        g: r.config.grids.g,
        tol: r.config.tolerances.beta_tol,
        classification: class.to_string(),
        evidence: EvidenceJson {
            probe_beta: ev.probe_beta,
            lyap_attractor: ev.lyap_attractor,
            lyap_repeller: ev.lyap_repeller,
            pinch: PinchJson::from(&ev.pinch),
            sink_source_forward: ev.sink_source.0,
            sink_source_backward: ev.sink_source.1,
            candidate_theta: ev.candidate_theta,
            candidate_x: ev.candidate_x,
            sink_source_steps: ev.sink_source_steps,
            lyap_delta: ev.lyap_delta,
            eps_pinch: ev.eps_pinch,
        },
        generated_at_unix: ctx.timestamp,
    };
    if let Err(e) = formats::write_json(&ctx.out_dir, "bifurcation.json", &report) {
        return io_fail(e);
    }
    0
}

// ---------------------------------------------------------------------
// regions
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct RegionJson {
    beta: f64,
    center: f64,
    half_width: f64,
    width: f64,
}

#[derive(Serialize)]
struct FLevelJson {
    level: usize,
    #[serde(rename = "I_n_width")]
    width: f64,
    #[serde(rename = "M_n")]
    m_n: usize,
    #[serde(rename = "K_n")]
    k_n: u64,
    f1: bool,
    f1_prime: bool,
    f1_prime_margin: f64,
    f2: bool,
    sufficient_bound: bool,
    vacuous: bool,
}

#[derive(Serialize)]
struct LevelJson {
    level: usize,
    #[serde(rename = "M_n")]
    m_n: usize,
    #[serde(rename = "K_n")]
    k_n: u64,
    b_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_plus: Option<f64>,
    #[serde(rename = "I_n", skip_serializing_if = "Option::is_none")]
    region: Option<RegionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

#[derive(Serialize)]
struct ScheduleJson {
    m0: usize,
    k0: u64,
    kappa: u64,
    b_inf: f64,
    alpha_minus: f64,
    alpha_plus: f64,
    admissible: bool,
    #[serde(rename = "sum_inv_k_ok")]
    sum_inv_k_ok: bool,
}

#[derive(Serialize)]
struct RegionsReport {
    beta: f64,
    beta_window_0_lo: f64,
    beta_window_0_hi: f64,
    n_max: usize,
    schedule: ScheduleJson,
    levels: Vec<LevelJson>,
    f_conditions: Vec<FLevelJson>,
    f_all_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at_unix: Option<u64>,
}

pub fn cmd_regions(ctx: &Ctx, n_max_flag: Option<usize>) -> i32 {
    let r = &ctx.resolved;
    let sc = &r.config.schedule;
    let n_max = n_max_flag.unwrap_or(sc.n_max);
    let mut schedule = match Schedule::new(sc.m0, sc.k0, sc.kappa, &r.strip) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let window0 = match regions::beta_bounds0(&r.family, &r.strip) {
        Ok(w) => w,
        Err(e) => return analysis_error(&e),
    };

    // choose M_n level by level; beta windows are bisected up to
    // beta_levels, deeper levels take the window minimum
    let mut windows: Vec<Option<(f64, f64)>> = vec![Some(window0)];
    for n in 1..=n_max {
        if n <= sc.beta_levels {
            match regions::choose_mn(&r.family, &r.strip, &r.rotation, &schedule, n, 512) {
                Ok(m_n) => {
                    if let Err(e) = schedule.push_m(m_n) {
                        return analysis_error(&e);
                    }
                }
                Err(e) => return analysis_error(&e),
            }
            match regions::beta_interval(&r.family, &r.strip, r.rotation.omega, n, &schedule, 512)
            {
                Ok(w) => windows.push(Some(w)),
                Err(e) => return analysis_error(&e),
            }
        } else {
            let (lo, _) = match schedule.window(n) {
                Ok(w) => w,
                Err(e) => return analysis_error(&e),
            };
            if let Err(e) = schedule.push_m(lo) {
                return analysis_error(&e);
            }
            windows.push(None);
        }
    }

    // probe beta: explicit, or the midpoint of the deepest bisected window
    let beta = ctx.beta.or(r.config.beta).unwrap_or_else(|| {
        let deepest = windows.iter().rev().find_map(|w| *w).unwrap_or(window0);
        0.5 * (deepest.0 + deepest.1)
    });

    let tower =
        match regions::region_tower(&r.family, &r.strip, r.rotation.omega, beta, &schedule, n_max)
        {
            Ok(t) => t,
            Err(e) => return analysis_error(&e),
        };
    let freport = match regions::check_f_conditions(&tower, &schedule, &r.rotation, n_max) {
        Ok(f) => f,
        Err(e) => return analysis_error(&e),
    };

    let mut levels = Vec::new();
    for n in 0..=n_max {
        let m_n = schedule.m(n).unwrap_or(0);
        let (bounds, skipped) = if m_n > sc.report_m_cap {
            (None, Some(format!("strip sampling skipped: M_{n} = {m_n} exceeds report_m_cap")))
        } else if tower[n].arc.is_none() {
            (None, Some("region empty".to_string()))
        } else {
            match regions::bounds_report(
                &r.family,
                &r.strip,
                &r.rotation,
                &schedule,
                &tower,
                n,
                regions::STRIP_GRID,
            ) {
                Ok(b) => (Some(BoundsJson::from(&b)), None),
                Err(e) => (None, Some(format!("bounds unavailable: {e}"))),
            }
        };
        levels.push(LevelJson {
            level: n,
            m_n,
            k_n: schedule.k(n),
            b_n: schedule.b(n),
            beta_minus: windows.get(n).and_then(|w| w.map(|x| x.0)),
            beta_plus: windows.get(n).and_then(|w| w.map(|x| x.1)),
            region: tower[n].arc.map(|a| RegionJson {
                beta,
                center: a.center(),
                half_width: a.half_width(),
                width: a.width(),
            }),
            bounds,
            skipped,
        });
    }
    let f_all = freport.levels.iter().all(|l| l.f1 && l.f1_prime && l.f2);
    let report = RegionsReport {
        beta,
        beta_window_0_lo: window0.0,
        beta_window_0_hi: window0.1,
        n_max,
        schedule: ScheduleJson {
            m0: sc.m0,
            k0: sc.k0,
            kappa: sc.kappa,
            b_inf: schedule.b_inf,
            alpha_minus: schedule.alpha_minus,
            alpha_plus: schedule.alpha_plus,
            admissible: schedule.admissible(),
            sum_inv_k_ok: true,
        },
        levels,
        f_conditions: freport
            .levels
            .iter()
            .map(|l| FLevelJson {
                level: l.level,
                width: l.width,
                m_n: l.m_n,
                k_n: l.k_n,
                f1: l.f1,
                f1_prime: l.f1_prime,
                f1_prime_margin: l.f1_prime_margin,
                f2: l.f2,
                sufficient_bound: l.sufficient_bound,
                vacuous: l.vacuous,
            })
            .collect(),
        f_all_hold: f_all,
        generated_at_unix: ctx.timestamp,
    };
    if let Err(e) = formats::write_json(&ctx.out_dir, "regions.json", &report) {
        return io_fail(e);
    }
    for l in &report.levels {
        println!(
            "level {}: M_n {} K_n {} b_n {:.6} window {:?}..{:?} I_n width {}",
            l.level,
            l.m_n,
            l.k_n,
            l.b_n,
            l.beta_minus,
            l.beta_plus,
            l.region.as_ref().map(|r| r.width).unwrap_or(0.0)
        );
    }
    println!("F conditions hold at beta {beta}: {f_all}");
    if f_all {
        0
    } else {
        1
    }
}

// ---------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------

pub fn cmd_sweep(ctx: &Ctx, from: Option<f64>, to: Option<f64>, count: usize) -> i32 {
    let r = &ctx.resolved;
    let window = match regions::beta_bounds0(&r.family, &r.strip) {
        Ok(w) => w,
        Err(e) => return analysis_error(&e),
    };
    let lo = from.unwrap_or(0.0);
    let hi = to.unwrap_or(window.1);
    if !(count >= 2 && hi > lo) {
        eprintln!("error: sweep needs --count >= 2 and --to > --from");
        return 2;
    }
    let betas: Vec<f64> =
        (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    let rows = bifurcation::sweep(
        &r.family,
        &r.strip,
        r.rotation.omega,
        &betas,
        r.config.grids.n,
        r.config.grids.g,
    );
    if let Err(e) =
        formats::write_file(&ctx.out_dir, "sweep.csv", formats::sweep_to_csv(&rows).as_bytes())
    {
        return io_fail(e);
    }
    println!("{} rows written to sweep.csv", rows.len());
    0
}
