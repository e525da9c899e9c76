//! scratch exploration (deleted before finalizing)
use qpf_core::*;
use qpf_core::regions::*;
use qpf_core::bifurcation::*;
use std::time::Instant;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "quarterpi".into());
    match which.as_str() {
        "quarterpi" => quarterpi(),
        "figure1" => figure1(),
        "classify" => classify_probe(),
        "bigalpha" => bigalpha(),
        _ => {}
    }
}

fn quarterpi() {
    let fam = Family::ArctanQuarterPi { alpha: 100.0 };
    let strip = Strip::new(0.0, 0.1, 0.5, std::f64::consts::FRAC_PI_2, 100.0, 3.0, 5.0, 5.6).unwrap();
    let omega = 2f64.sqrt() / 3.0;
    let rot = RotationSpec::new(omega, 0.05, 1.0, 100_000).unwrap();
    println!("omega = {omega}, margin(1e5) = {:.6}", rot.diophantine_margin());
    let (b_lo, b_hi) = beta_bounds0(&fam, &strip).unwrap();
    println!("B(0) = [{b_lo:.6}, {b_hi:.6}]");
    for beta in [b_lo, 0.5*(b_lo+b_hi), b_hi] {
        let r = critical_region0(&fam, &strip, beta).unwrap();
        println!("  I0({beta:.4}): width {:.4} center {:?}", r.width(), r.arc.map(|a| a.center()));
    }
    // d(k omega) for k=1,2,3 vs widths
    for k in 1..4 { println!("  d({k} w, 0) = {:.4}", circle_dist(reduce(k as f64 * omega), 0.0)); }

    let schedule = Schedule::new(2, 64, 2, &strip).unwrap();
    println!("schedule: b1 = {:.6}, b_inf = {:.6}, alpha- = {:.3e}, alpha+ = {:.3e}, admissible = {}",
        schedule.b(1), schedule.b_inf, schedule.alpha_minus, schedule.alpha_plus, schedule.admissible());

    let t0 = Instant::now();
    match admissible_interval(&fam, &strip, omega, 0, &schedule, 512) {
        Ok((lo, hi)) => {
            println!("B(1) = [{lo:.9}, {hi:.9}]  ({:?})", t0.elapsed());
            for beta in [lo + 1e-5, lo + 5e-5, lo + 1e-4, lo + 1.5e-4, lo + (hi-lo)*0.5, lo + (hi-lo)*0.9] {
                let tower = region_tower(&fam, &strip, omega, beta, &schedule, 1).unwrap();
                println!("  beta {beta:.6}: I0 w {:.4}, I1 {:?} w {:.3e}",
                    tower[0].width(), tower[1].arc.map(|a| a.center()), tower[1].width());
                match bounds_report(&fam, &strip, &rot, &schedule, &tower, 0, 257) {
                    Ok(b) => println!("    H_phi {:.3e} (bound {:.3e})  H_psi {:.3e} (bound {:.3e})  nu {:.3} nu+ {:.3} nu_lower {:.3e} geom_bound {:.3e} i0_small {} c~1 {:.3} c~2 {:.3}",
                        b.h_phi, b.h_phi_bound, b.h_psi, b.h_psi_bound, b.nu_measured, b.nu_plus_measured, b.nu_lower, b.geometric_bound, b.i0_smallness_ok, b.c_tilde_1, b.c_tilde_2),
                    Err(e) => println!("    bounds error: {e}"),
                }
                // brute force vs sublevel on 4096 grid
                let bf = next_region_brute_force(&fam, &strip, omega, beta, &tower[0], 2, 4096).unwrap();
                let arc1 = tower[1].arc;
                let mut mism = 0; let mut inside = 0;
                for i in 0..4096 {
                    let th = i as f64 / 4096.0;
                    let sub = arc1.map(|a| a.contains(th)).unwrap_or(false);
                    if bf[i] { inside += 1; }
                    if sub != bf[i] { mism += 1; }
                }
                println!("    brute-force: {inside} cells in I1, mismatches vs sublevel: {mism}");
            }
        }
        Err(e) => println!("B(1) error: {e}"),
    }
}

fn figure1() {
    let fam = Family::ArctanIntro { alpha: 100.0 };
    let strip = Strip::new(-0.026, 0.026, 0.4, std::f64::consts::FRAC_PI_2, 100.0, 12.0, 0.4, 6.4).unwrap();
    let rot = RotationSpec::golden(1_000_000);
    let (b_lo, b_hi) = beta_bounds0(&fam, &strip).unwrap();
    println!("B(0) = [{b_lo:.6}, {b_hi:.6}]");
    for (g, n, tol) in [(1usize<<12, 20_000usize, 1e-4), (1<<15, 100_000, 1e-5)] {
        let t0 = Instant::now();
        let res = bisect_beta_c(&fam, &strip, rot.omega, tol, n, g).unwrap();
        println!("G=2^{} N={n}: beta_c = {:.7} bracket [{:.7}, {:.7}] iters {}  ({:?})",
            g.trailing_zeros(), res.beta_c, res.bracket.0, res.bracket.1, res.iterations, t0.elapsed());
    }
}

fn classify_probe() {
    let fam = Family::ArctanIntro { alpha: 100.0 };
    let strip = Strip::new(-0.026, 0.026, 0.4, std::f64::consts::FRAC_PI_2, 100.0, 12.0, 0.4, 6.4).unwrap();
    let rot = RotationSpec::golden(1_000_000);
    let beta_c: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0.7805931);
    let g = 1usize << 15;
    let n = 10_000;
    for beta in [0.7769, 0.7805, beta_c, beta_c - 1e-4] {
        let t0 = Instant::now();
        match figure_data(&fam, &strip, rot.omega, beta, n, g) {
            Ok((a, r, p)) => println!("beta {beta:.7}: lyap+ {:.4} lyap- {:.4} min_gap {:.3e} mean {:.3e} max {:.3e} argmin {:.4} ({:?})",
                a.lyapunov.unwrap(), r.lyapunov.unwrap(), p.min_gap, p.mean_gap, p.max_gap, p.argmin_theta, t0.elapsed()),
            Err(e) => println!("beta {beta:.7}: {e}"),
        }
    }
    // sink-source exponents at the pinch for several horizons
    let probe = beta_c - 1e-4;
    let (a, r, p) = figure_data(&fam, &strip, rot.omega, probe, n, g).unwrap();
    let idx = (p.argmin_theta * g as f64) as usize % g;
    let x_star = 0.5 * (a.values[idx] + r.values[idx]);
    println!("candidate: theta {:.6} x {:.6}", p.argmin_theta, x_star);
    for n_ss in [4usize, 8, 16, 32, 64, 128] {
        match graphs::finite_time_exponents(&fam, rot.omega, probe, p.argmin_theta, x_star, n_ss) {
            Ok((f, b)) => println!("  n_ss {n_ss}: fwd {f:.4} back {b:.4}"),
            Err(e) => println!("  n_ss {n_ss}: {e}"),
        }
    }
}


fn bigalpha() {
    let alpha = 2e6;
    let fam = Family::ArctanQuarterPi { alpha };
    let strip = Strip::new(0.0, 10.0 / alpha, 0.12, std::f64::consts::FRAC_PI_2, alpha, 3.0, 20.0, 5.6).unwrap();
    let omega = 3f64.sqrt() / 5.0;
    let rot = RotationSpec::new(omega, 0.10, 1.0, 100_000).unwrap();
    println!("omega = {omega}, margin(1e5) = {:.6}", rot.margin_up_to(100_000));
    let (b_lo, b_hi) = beta_bounds0(&fam, &strip).unwrap();
    println!("B(0) = [{b_lo:.9}, {b_hi:.9}] width {:.3e}", b_hi - b_lo);
    let r = critical_region0(&fam, &strip, 0.5*(b_lo+b_hi)).unwrap();
    println!("I0(mid): width {:.4}", r.width());
    for k in 1..4 { println!("  d({k} w, 0) = {:.4}", circle_dist(reduce(k as f64 * omega), 0.0)); }
    let schedule = Schedule::new(2, 64, 2, &strip).unwrap();
    let t0 = std::time::Instant::now();
    match admissible_interval(&fam, &strip, omega, 0, &schedule, 512) {
        Ok((lo, hi)) => {
            println!("B(1) = [{lo:.12}, {hi:.12}] width {:.3e} ({:?})", hi - lo, t0.elapsed());
            for frac in [0.05f64, 0.3, 0.7] {
                let beta = lo + (hi - lo) * frac;
                let tower = region_tower(&fam, &strip, omega, beta, &schedule, 1).unwrap();
                println!("  beta {beta:.9}: I0 w {:.4}, I1 w {:.4e}", tower[0].width(), tower[1].width());
                match bounds_report(&fam, &strip, &rot, &schedule, &tower, 0, 257) {
                    Ok(b) => println!("    H_phi {:.3e} (bound {:.3e})  H_psi {:.3e} (bound {:.3e})  nu {:.3} nu+ {:.3} nu_lower {:.4} geom {:.3e} vs |I1| {:.3e}  i0_small {}",
                        b.h_phi, b.h_phi_bound, b.h_psi, b.h_psi_bound, b.nu_measured, b.nu_plus_measured, b.nu_lower, b.geometric_bound, tower[1].width(), b.i0_smallness_ok),
                    Err(e) => println!("    bounds error: {e}"),
                }
                let bf = next_region_brute_force(&fam, &strip, omega, beta, &tower[0], 2, 4096).unwrap();
                let arc1 = tower[1].arc;
                let mut mism = 0;
                for i in 0..4096 {
                    let th = i as f64 / 4096.0;
                    let sub = arc1.map(|a| a.contains(th)).unwrap_or(false);
                    if sub != bf[i] { mism += 1; }
                }
                println!("    brute-force mismatches: {mism}");
            }
        }
        Err(e) => println!("B(1) error: {e}"),
    }
}
