//! Property tests for the circle geometry, family contracts and jets.

use proptest::prelude::*;
use qpf_core::jet::{jet_forward, jet_forward_from};
use qpf_core::{circle_dist, reduce, Arc, Family, RotationSpec};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

proptest! {
    #[test]
    fn circle_dist_symmetric_bounded(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let d = circle_dist(a, b);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert_eq!(d, circle_dist(b, a));
        prop_assert!(circle_dist(a, a) == 0.0);
    }

    #[test]
    fn circle_dist_triangle(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let ab = circle_dist(a, b);
        let bc = circle_dist(b, c);
        let ac = circle_dist(a, c);
        prop_assert!(ac <= ab + bc + 1e-15, "triangle: {ac} > {ab} + {bc}");
    }

    #[test]
    fn arc_gap_zero_iff_intersect(
        c1 in 0.0f64..1.0, w1 in 0.0f64..0.2,
        c2 in 0.0f64..1.0, w2 in 0.0f64..0.2,
    ) {
        let a = Arc::new(c1, w1).unwrap();
        let b = Arc::new(c2, w2).unwrap();
        let gap = qpf_core::torus::arc_gap(&a, &b);
        prop_assert_eq!(gap == 0.0, a.intersects(&b));
        // cross-check intersection by dense point sampling
        let mut hit = false;
        for i in 0..2000 {
            let t = i as f64 / 2000.0;
            if a.contains(t) && b.contains(t) {
                hit = true;
                break;
            }
        }
        if hit {
            prop_assert!(gap == 0.0);
        }
        if gap > 1e-3 {
            prop_assert!(!hit);
        }
    }

    #[test]
    fn golden_margin_dominates_convergents(horizon in 1u64..3000) {
        // golden mean is badly approximable: the margin over any horizon
        // stays above 1/sqrt(5) - eps with the worst constant at k = 1
        let rot = RotationSpec::golden(horizon);
        let m = rot.diophantine_margin();
        prop_assert!(m >= 1.0 - GOLDEN - 1e-12);
        prop_assert!(m <= 0.5);
    }

    #[test]
    fn fibre_maps_increasing_in_x(beta in 0.0f64..0.9, theta in 0.0f64..1.0) {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let mut prev = f64::NEG_INFINITY;
        for i in 0..300 {
            let x = -0.026 + (1.5708 + 0.026) * i as f64 / 299.0;
            let v = fam.eval(beta, theta, x).unwrap();
            prop_assert!(v > prev, "not increasing at x = {x}");
            prev = v;
        }
    }

    #[test]
    fn fibre_maps_nonincreasing_in_beta(theta in 0.0f64..1.0, x in -0.02f64..1.5) {
        let fam = Family::ArctanQuarterPi { alpha: 100.0 };
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let beta = i as f64 / 99.0;
            let v = fam.eval(beta, theta, x).unwrap();
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn inverse_round_trip_1e12(
        beta in 0.0f64..0.9,
        theta in 0.0f64..1.0,
        x in -0.02f64..1.55,
        q in 1.5f64..4.0,
    ) {
        for fam in [
            Family::ArctanIntro { alpha: 100.0 },
            Family::ArctanQuarterPi { alpha: 100.0 },
            Family::HqDrive { alpha: 100.0, q },
        ] {
            let y = fam.eval(beta, theta, x).unwrap();
            let back = fam.inverse_at(beta, theta, y).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * (1.0 + x.abs()),
                "{}: x {x} back {back}", fam.kind_name());
        }
    }

    #[test]
    fn jet_cocycle_1e10(
        beta in 0.1f64..0.75,
        theta in 0.0f64..1.0,
        x in 0.1f64..1.5,
        split in 1usize..11,
    ) {
        let fam = Family::ArctanIntro { alpha: 100.0 };
        let n = 12usize;
        let whole = jet_forward(&fam, GOLDEN, beta, theta, x, n).unwrap();
        let first = jet_forward(&fam, GOLDEN, beta, theta, x, split).unwrap();
        let seed = first[split - 1];
        let rest = jet_forward_from(
            &fam,
            GOLDEN,
            beta,
            reduce(theta + split as f64 * GOLDEN),
            seed,
            n - split,
        )
        .unwrap();
        let composed = rest[n - split - 1];
        let full = whole[n - 1];
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(close(full.x, composed.x));
        prop_assert!(close(full.dx, composed.dx));
        prop_assert!(close(full.dtheta, composed.dtheta));
        prop_assert!(close(full.dtheta2, composed.dtheta2));
        prop_assert!(close(full.dbeta, composed.dbeta));
    }
}

#[test]
fn lyapunov_quadrature_converges_with_grid() {
    // grid doubling changes lambda by less than 1e-3 away from beta_c
    let fam = Family::ArctanIntro { alpha: 100.0 };
    let strip = qpf_core::Strip::new(
        -0.026,
        0.026,
        0.4,
        std::f64::consts::FRAC_PI_2,
        100.0,
        12.0,
        0.25,
        6.4,
    )
    .unwrap();
    for beta in [0.3, 0.7769] {
        let mut lams = Vec::new();
        for g in [1usize << 12, 1 << 13] {
            let mut a = qpf_core::graphs::pullback_attractor(&fam, &strip, GOLDEN, beta, 4000, g);
            lams.push(qpf_core::graphs::lyapunov(&fam, &mut a).unwrap());
        }
        assert!(
            (lams[0] - lams[1]).abs() <= 1e-3,
            "beta {beta}: lambda {} vs {}",
            lams[0],
            lams[1]
        );
    }
}

#[test]
fn keller_sign_convention_below_beta_c() {
    // upper graph attracts (lambda < 0), lower graph repels (lambda > 0)
    let fam = Family::ArctanIntro { alpha: 100.0 };
    let strip = qpf_core::Strip::new(
        -0.026,
        0.026,
        0.4,
        std::f64::consts::FRAC_PI_2,
        100.0,
        12.0,
        0.25,
        6.4,
    )
    .unwrap();
    for beta in [0.0, 0.4, 0.7, 0.7769] {
        let mut a = qpf_core::graphs::pullback_attractor(&fam, &strip, GOLDEN, beta, 4000, 1024);
        let mut r = qpf_core::graphs::pushforward_repeller(&fam, &strip, GOLDEN, beta, 4000, 1024);
        let la = qpf_core::graphs::lyapunov(&fam, &mut a).unwrap();
        let lr = qpf_core::graphs::lyapunov(&fam, &mut r).unwrap();
        assert!(la < 0.0 && lr > 0.0, "beta {beta}: {la} / {lr}");
        // ordering: repeller <= attractor pointwise
        for i in 0..1024 {
            assert!(r.values[i] <= a.values[i]);
        }
    }
}
