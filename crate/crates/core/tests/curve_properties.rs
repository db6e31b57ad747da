use pom_core::reward::{
    base_reward, base_reward_slope, calibrate_cutoff, calibrate_schedule, cutoff_factor, reward,
    BaseCurveParams, CutoffParams,
};
use proptest::prelude::*;

fn base_params() -> impl Strategy<Value = BaseCurveParams> {
    (0.01f64..10.0, 1.01f64..50.0, 0.01f64..100.0)
        .prop_map(|(a, ratio, scale)| BaseCurveParams::new(a, a * ratio, scale).unwrap())
}

fn cutoff_params() -> impl Strategy<Value = CutoffParams> {
    (0.01f64..100.0, 1e-3f64..10.0)
        .prop_map(|(d_co, spread)| CutoffParams::new(d_co, spread).unwrap())
}

fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn nonnegative_everywhere(p in base_params(), u in 0.0f64..1.0) {
        for d in [u * 20.0 / p.a(), u * 1e4 / p.a(), u * 1e-6] {
            let r = base_reward(d, &p).unwrap();
            prop_assert!(r >= 0.0 && r.is_finite(), "d={d} r={r}");
        }
    }

    #[test]
    fn zero_at_origin(p in base_params()) {
        prop_assert_eq!(base_reward(0.0, &p).unwrap(), 0.0);
    }

    #[test]
    fn linear_near_origin(p in base_params()) {
        let d = 1e-8;
        let expected = p.scale() * (p.b() - p.a()).sqrt();
        let r = base_reward(d, &p).unwrap() / d;
        prop_assert!(rel_diff(r, expected) < 1e-4, "{r} vs {expected}");
    }

    #[test]
    fn single_interior_maximum(p in base_params()) {
        let n = 10_000;
        let (lo, hi) = (1e-6, 20.0 / p.a());
        let step = (hi - lo) / (n - 1) as f64;
        let mut changes = 0;
        let mut last_sign = 0i8;
        for i in 0..n {
            let d = lo + step * i as f64;
            let h = 1e-6 * d.max(1.0);
            let s = base_reward(d + h, &p).unwrap() - base_reward((d - h).max(0.0), &p).unwrap();
            let sign = if s > 0.0 { 1 } else if s < 0.0 { -1 } else { 0 };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    changes += 1;
                }
                last_sign = sign;
            }
        }
        prop_assert_eq!(changes, 1);
        prop_assert_eq!(last_sign, -1);
    }

    #[test]
    fn logistic_symmetry(c in cutoff_params(), x in -1e3f64..1e3) {
        let s = cutoff_factor(c.d_co() + x, &c) + cutoff_factor(c.d_co() - x, &c);
        prop_assert!((s - 1.0).abs() <= 1e-12, "{s}");
    }

    #[test]
    fn cutoff_finite_far_above(c in cutoff_params(), x in 0.0f64..1e300) {
        let f = cutoff_factor(c.d_co() + x, &c);
        prop_assert!(f.is_finite() && (0.0..=0.5).contains(&f));
    }

    #[test]
    fn analytic_slope_matches_central_difference(p in base_params(), u in 1e-3f64..1.0) {
        let d = u * 20.0 / p.a();
        let h = 1e-6 * d.max(1.0);
        let numeric = (base_reward(d + h, &p).unwrap() - base_reward(d - h, &p).unwrap()) / (2.0 * h);
        let analytic = base_reward_slope(d, &p).unwrap();
        // The slope vanishes at the maximum; measure error against the
        // curve's own slope scale there.
        let r = base_reward(d, &p).unwrap();
        let floor = 1e-3 * r / d.max(1.0);
        let err = (numeric - analytic).abs() / analytic.abs().max(floor);
        prop_assert!(err < 1e-5, "d={d} numeric={numeric} analytic={analytic}");
    }

    #[test]
    fn cutoff_strictly_decreasing(c in cutoff_params(), x in -20.0f64..20.0, dx in 1e-3f64..1.0) {
        let d = (c.d_co() + x * c.spread()).max(0.0);
        let e = d + dx * c.spread();
        prop_assert!(cutoff_factor(e, &c) < cutoff_factor(d, &c));
    }

    #[test]
    fn calibrated_cutoff_round_trip(half in 0.01f64..100.0, gap in 1e-3f64..10.0) {
        let c = calibrate_cutoff(half, half + gap).unwrap();
        prop_assert!((cutoff_factor(half, &c) - 0.5).abs() <= 1e-12);
        prop_assert!((cutoff_factor(half + gap, &c) - 0.1).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calibrated_reward_declines_above_cutoff(
        k in 0.1f64..10.0,
        dh in 0.0f64..0.05,
        dt in -0.03f64..0.03,
        r_max in 0.1f64..10.0,
    ) {
        let s = calibrate_schedule(1.75 * k, (2.20 + dh) * k, (2.37 + dt) * k, r_max).unwrap();
        let c = *s.cutoff().unwrap();
        let n = 2000;
        let mut prev = reward(c.d_co(), &s).unwrap();
        for i in 1..=n {
            let d = c.d_co() + 30.0 * c.spread() * i as f64 / n as f64;
            let r = reward(d, &s).unwrap();
            prop_assert!(r < prev, "d={d}");
            prev = r;
        }
    }
}
