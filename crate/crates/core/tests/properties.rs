use adgt::gap_tracker::Schedule;
use adgt::harness::properties::*;
use adgt::harness::trace::{Step, Trace, TraceRow};
use adgt::linalg::dot;
use adgt::mirror_maps::{FeasibleSet, MirrorMap, TimeVaryingMap};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), (-300i32..300).prop_map(|e| 10f64.powi(e))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bregman_identities(n in 1usize..7, seed in any::<u64>()) {
        for (name, m) in catalogue(n, seed).unwrap() {
            prop_assert!(strong_smoothness_slack(&m, 20, seed).unwrap() >= -1e-10, "{}", name);
            prop_assert!(three_point_error(&m, 20, seed ^ 1).unwrap() <= 1e-10, "{}", name);
        }
    }

    #[test]
    fn conjugate_maximizers_are_optimal(n in 1usize..7, seed in any::<u64>()) {
        for (name, m) in catalogue(n, seed).unwrap() {
            prop_assert!(conjugate_optimality(&m, 3, 30, seed).unwrap() <= 1e-9, "{}", name);
            prop_assert!(conjugate_monotonicity(&m, 10, seed).unwrap() <= 1e-12, "{}", name);
        }
    }

    #[test]
    fn fenchel_young_on_quadratics(
        z in prop::collection::vec(-10.0..10.0f64, 3),
        c in prop::collection::vec(-2.0..2.0f64, 3),
        x in prop::collection::vec(-5.0..5.0f64, 3),
        sigma in 0.1..10.0f64,
    ) {
        let m = TimeVaryingMap::fixed(MirrorMap::euclidean(FeasibleSet::rn(3), c.clone(), sigma).unwrap());
        let (conj, u) = m.conjugate(&z).unwrap();
        // Closed form: φ*(z) = ⟨z, c⟩ + ‖z‖²/(2σ).
        let closed = dot(&z, &c) + dot(&z, &z) / (2.0 * sigma);
        prop_assert!((conj - closed).abs() <= 1e-10 * (1.0 + closed.abs()));
        prop_assert!((conj + m.value(&u) - dot(&z, &u)).abs() <= 1e-10 * (1.0 + conj.abs()));
        prop_assert!(conj + m.value(&x) - dot(&z, &x) >= -1e-10 * (1.0 + conj.abs()));
    }

    #[test]
    fn schedules_accumulate(sigma in 0.1..10.0f64, l in 0.1..100.0f64, k in 1usize..300, kappa in 1.5..1e3f64) {
        let all = [
            Schedule::md_fixed_horizon(l, sigma, 1.0, k).unwrap(),
            Schedule::md_anytime(1.0, k).unwrap(),
            Schedule::amd(sigma, l, k).unwrap(),
            Schedule::gd(sigma, l, k).unwrap(),
            Schedule::asc(kappa, k).unwrap(),
            Schedule::asc_unconstrained(kappa, k).unwrap(),
            Schedule::fw(k).unwrap(),
            Schedule::mp(sigma, l, k).unwrap(),
        ];
        for s in &all {
            let mut sum = 0.0;
            for i in 0..=k {
                sum += s.a(i);
                prop_assert!((s.big_a(i) - sum).abs() <= 1e-9 * sum.max(1.0), "{:?} at {}", s.kind(), i);
            }
        }
        let amd = &all[2];
        for i in 0..=k {
            prop_assert!(amd.a(i).powi(2) / amd.big_a(i) <= sigma / l * (1.0 + 1e-12));
        }
        let asc = &all[4];
        let r = Schedule::asc_ratio(kappa);
        // r solves κr² + r − 1 = 0, i.e. a_i²/(A_i A_{i−1}) = 1/κ.
        prop_assert!((r * r / (1.0 - r) - 1.0 / kappa).abs() <= 1e-9);
        for i in 1..=k {
            prop_assert!((asc.a(i) / asc.big_a(i) - r).abs() <= 1e-12);
        }
        prop_assert_eq!(all[7].a(0), 0.0);
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(
        (finite(), prop::option::of(finite()), finite(), finite(), finite(), prop::option::of(finite()), finite(), finite()),
        1..30,
    ), continuous in any::<bool>(), vi in any::<bool>(), saddle in prop::option::of(finite())) {
        let t = Trace {
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, r)| TraceRow {
                    step: if continuous { Step::T(i as f64 * 0.1) } else { Step::K(i) },
                    a_total: r.0,
                    f_xhat: r.1,
                    upper: r.2,
                    lower: r.3,
                    gap: r.4,
                    ed: r.5,
                    scaled_gap: r.6,
                    theorem_bound: r.7,
                    vi: if vi { Some((saddle, r.4)) } else { None },
                })
                .collect(),
        };
        let text = t.emit().unwrap();
        prop_assert_eq!(Trace::parse(&text).unwrap(), t);
    }
}
