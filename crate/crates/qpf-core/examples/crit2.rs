use qpf_core::*;
fn main() {
    let fam = Family::ArctanIntro { alpha: 100.0 };
    let strip = Strip::new(-0.026, 0.026, 0.4, std::f64::consts::FRAC_PI_2, 100.0, 12.0, 0.4, 6.4).unwrap();
    let omega = RotationSpec::golden(1).omega;
    for g in [1usize << 13, 1 << 14, 1 << 15] {
        for beta in [0.7769, 0.7805931] {
            let mut a = graphs::pullback_attractor(&fam, &strip, omega, beta, 10_000, g);
            let mut r = graphs::pushforward_repeller(&fam, &strip, omega, beta, 10_000, g);
            if a.is_absent() || r.is_absent() {
                println!("G=2^{} beta {beta}: ABSENT (att {} rep {} escaped)", g.trailing_zeros(), a.escaped.len(), r.escaped.len());
                continue;
            }
            let la = graphs::lyapunov(&fam, &mut a).unwrap();
            let lr = graphs::lyapunov(&fam, &mut r).unwrap();
            let p = graphs::pinching(&a, &r).unwrap();
            println!("G=2^{} beta {beta}: min {:.4e} max {:.4e} lyap+ {:.3} lyap- {:.3}", g.trailing_zeros(), p.min_gap, p.max_gap, la, lr);
        }
    }
}
