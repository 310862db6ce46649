mod common;

use proptest::prelude::*;
use sitepower::formulation::{big_m_base, build, FormulationKind, VarRole};
use sitepower::instgen::{generate, received_power_range, scale, small_params, GenParams};
use sitepower::{
    complete_activation, is_served, objective, sinr, verify_solution, Instance, Instance64,
};

fn instance() -> impl Strategy<Value = Instance64> {
    (0u64..5000).prop_map(common::small)
}

fn activation(inst: &Instance64) -> impl Strategy<Value = Vec<Option<usize>>> {
    prop::collection::vec(prop::option::of(0..inst.n_levels()), inst.n_transmitters())
}

fn with_activation() -> impl Strategy<Value = (Instance64, Vec<Option<usize>>)> {
    instance().prop_flat_map(|i| {
        let a = activation(&i);
        (Just(i), a)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sinr_is_invariant_under_scaling((inst, act) in with_activation(), exp in -12i32..3) {
        let f = 10f64.powi(exp);
        let s = scale(&inst, f);
        for t in 0..inst.n_testpoints() {
            for b in (0..inst.n_transmitters()).filter(|&b| act[b].is_some()) {
                let (x, y) = (sinr(&inst, &act, t, b).unwrap(), sinr(&s, &act, t, b).unwrap());
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(f64::MIN_POSITIVE), "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn served_matches_the_cross_multiplied_inequality((inst, act) in with_activation()) {
        for t in 0..inst.n_testpoints() {
            for beta in 0..inst.n_transmitters() {
                let rhs = common::sinr_rhs(&inst, &act, t, beta);
                let served = is_served(&inst, &act, t, beta);
                // Away from the 1e-9 comparison band both views must agree.
                if rhs.abs() > 1e-6 {
                    prop_assert_eq!(served, act[beta].is_some() && rhs <= 0.0, "t{} b{} rhs {}", t, beta, rhs);
                }
            }
        }
    }

    #[test]
    fn objective_matches_the_binary_encoding((inst, act) in with_activation()) {
        let Some(sol) = complete_activation(&inst, &act) else { return Ok(()) };
        prop_assert!(verify_solution(&inst, &sol).is_feasible());
        let m = build(FormulationKind::Natural, &inst, &big_m_base(&inst)).unwrap();
        let x = m.encode(&sol);
        prop_assert!(m.max_violation(&x) <= 1e-9);
        let raw: f64 = m
            .columns()
            .iter()
            .zip(&x)
            .filter_map(|(c, v)| match c.role {
                VarRole::Z { l, .. } => Some(inst.cost(l) * v),
                _ => None,
            })
            .sum();
        prop_assert_eq!(objective(&inst, &sol), raw);
    }

    #[test]
    fn unassigning_one_testpoint_only_touches_coverage((inst, act) in with_activation(), t in 0usize..10) {
        let Some(sol) = complete_activation(&inst, &act) else { return Ok(()) };
        let t = t % inst.n_testpoints();
        let mut servers = sol.server().to_vec();
        servers[t] = None;
        let moved = sitepower::Solution::new(servers, sol.level().to_vec());
        let report = verify_solution(&inst, &moved);
        for v in &report.violations {
            prop_assert!(matches!(v, sitepower::Violation::Coverage { .. }), "{}", v);
        }
    }

    #[test]
    fn generated_instances_are_valid(seed in any::<u64>(), nb in 1usize..12, nt in 1usize..40, eta in 2.0f64..4.0) {
        let p = GenParams { n_transmitters: nb, n_testpoints: nt, pathloss_exponent: eta, seed, ..GenParams::default() };
        let inst: Instance64 = generate(&p).unwrap();
        prop_assert_eq!(Instance::new(inst.to_spec()).unwrap(), inst.clone());
        prop_assert!(inst.coverage() <= nt);
        let small: Instance64 = generate(&small_params(seed)).unwrap();
        prop_assert!(small.n_transmitters() <= 4 && small.n_testpoints() <= 10 && small.n_levels() <= 2);
    }

    #[test]
    fn scaled_powers_stay_in_range(seed in any::<u64>()) {
        let p = GenParams { n_transmitters: 10, n_testpoints: 60, seed, ..GenParams::default() };
        let inst: Instance64 = generate(&p).unwrap();
        let (lo, hi) = received_power_range(&inst);
        prop_assert!(lo > 1e-4 && hi < 1e5, "{} {}", lo, hi);
    }

    #[test]
    fn f32_and_f64_agree_on_clear_cases((inst, act) in with_activation()) {
        let single: Instance<f32> = inst.cast();
        for t in 0..inst.n_testpoints() {
            for b in 0..inst.n_transmitters() {
                if common::sinr_rhs(&inst, &act, t, b).abs() > 1e-3 * inst.threshold() * inst.noise().max(1.0) {
                    prop_assert_eq!(is_served(&inst, &act, t, b), is_served(&single, &act, t, b));
                }
            }
        }
    }
}
