use std::collections::BTreeMap;
use std::ffi::CString;

use proptest::prelude::*;
use sitepower::formulation::mps::to_mps_string;
use sitepower::formulation::{big_m_base, build, FormulationKind, MilpModel, VarKind};
use sitepower::framework::{solve_framework, Framework, FrameworkConfig};
use sitepower::instgen::{generate, small_params};
use sitepower::lp::{check_result, BoundOverrides, DenseSimplex, LpBackend, LpStatus};
use sitepower::oracle::{brute_force, DEFAULT_CAP};
use sitepower::Instance64;
use sitepower_highs::HighsBackend;

fn model(seed: u64, kind: FormulationKind) -> (Instance64, MilpModel<f64>) {
    let inst: Instance64 = generate(&small_params(seed)).unwrap();
    let m = build(kind, &inst, &big_m_base(&inst)).unwrap();
    (inst, m)
}

/// Random 0/1 fixings of some binary columns.
fn overrides(m: &MilpModel<f64>, picks: &[(usize, bool)]) -> BoundOverrides<f64> {
    let bin: Vec<usize> = (0..m.n_cols()).filter(|&j| m.column(j).integer).collect();
    let mut o = BTreeMap::new();
    if bin.is_empty() {
        return o;
    }
    for &(k, up) in picks {
        let v = if up { 1.0 } else { 0.0 };
        o.insert(bin[k % bin.len()], (v, v));
    }
    o
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn agrees_with_dense_simplex(
        seed in 0u64..10_000,
        reform in any::<bool>(),
        picks in prop::collection::vec((0usize..200, any::<bool>()), 0..4),
    ) {
        let kind = if reform { FormulationKind::Reformulated } else { FormulationKind::Natural };
        let (_, m) = model(seed, kind);
        let o = overrides(&m, &picks);
        let a = HighsBackend::default().open(&m).solve(&o);
        let b = DenseSimplex::default().open(&m).solve(&o);
        prop_assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            let scale = a.objective.abs().max(1.0);
            prop_assert!((a.objective - b.objective).abs() <= 1e-6 * scale, "{} vs {}", a.objective, b.objective);
            check_result(&m, &o, &a, 1e-6).map_err(TestCaseError::fail)?;
        }
    }
}

#[test]
fn session_restores_bounds_between_solves() {
    let (_, m) = model(11, FormulationKind::Natural);
    let be = HighsBackend::default();
    let mut s = be.open(&m);
    let free = s.solve(&BoundOverrides::new());
    assert_eq!(free.status, LpStatus::Optimal);
    let z = (0..m.n_cols())
        .find(|&j| m.column(j).role.kind() == VarKind::Z)
        .unwrap();
    let fixed = s.solve(&[(z, (1.0, 1.0))].into_iter().collect());
    assert_eq!(fixed.status, LpStatus::Optimal);
    assert!(fixed.objective >= free.objective - 1e-9);
    let again = s.solve(&BoundOverrides::new());
    assert!((again.objective - free.objective).abs() < 1e-9);
}

#[test]
fn reduced_costs_match_dense() {
    for seed in 0..20 {
        let (_, m) = model(seed, FormulationKind::Natural);
        let a = HighsBackend::default()
            .open(&m)
            .solve(&BoundOverrides::new());
        let b = DenseSimplex::default()
            .open(&m)
            .solve(&BoundOverrides::new());
        if a.status != LpStatus::Optimal {
            continue;
        }
        // Reduced costs need not be unique under degeneracy; both must still
        // certify optimality: d_j >= 0 at lower bound, <= 0 at upper.
        for r in [&a, &b] {
            for (j, d) in r.reduced_costs.iter().enumerate() {
                let c = m.column(j);
                if r.primal[j] <= c.lower + 1e-9 && r.primal[j] < c.upper - 1e-9 {
                    assert!(*d >= -1e-6, "seed {} col {} d {}", seed, j, d);
                } else if r.primal[j] >= c.upper - 1e-9 && r.primal[j] > c.lower + 1e-9 {
                    assert!(*d <= 1e-6, "seed {} col {} d {}", seed, j, d);
                }
            }
        }
    }
}

#[test]
fn frameworks_match_oracle_with_highs() {
    for seed in 0..15 {
        let inst: Instance64 = generate(&small_params(seed)).unwrap();
        let oracle = brute_force(&inst, DEFAULT_CAP).unwrap();
        for f in Framework::ALL {
            let r = solve_framework(
                &inst,
                f,
                &HighsBackend::default(),
                &FrameworkConfig::default(),
            );
            match oracle.optimum {
                Some(opt) => assert!(
                    r.objective.is_some_and(|o| (o - opt).abs() < 1e-6),
                    "seed {} {} {:?} {:?}",
                    seed,
                    f,
                    r.status,
                    r.objective
                ),
                None => assert!(r.objective.is_none(), "seed {} {}", seed, f),
            }
        }
    }
}

/// Solves an MPS file as a MIP with the HiGHS reader.
fn highs_mip_from_file(path: &std::path::Path) -> (i32, f64) {
    use highs_sys::*;
    let file = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let h = Highs_create();
        Highs_setBoolOptionValue(h, c"output_flag".as_ptr(), 0);
        Highs_setIntOptionValue(h, c"threads".as_ptr(), 1);
        assert_eq!(
            Highs_readModel(h, file.as_ptr()),
            0,
            "HiGHS rejected the MPS file"
        );
        Highs_run(h);
        let out = (Highs_getModelStatus(h) as i32, Highs_getObjectiveValue(h));
        Highs_destroy(h);
        out
    }
}

#[test]
fn exported_mps_solves_to_oracle_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let mut checked = 0;
    for seed in 0..12 {
        let inst: Instance64 = generate(&small_params(seed)).unwrap();
        let oracle = brute_force(&inst, DEFAULT_CAP).unwrap();
        for kind in [FormulationKind::Natural, FormulationKind::Reformulated] {
            let m = build(kind, &inst, &big_m_base(&inst)).unwrap();
            let path = dir.path().join(format!("s{}-{:?}.mps", seed, kind));
            std::fs::write(&path, to_mps_string(&m, "sitepower")).unwrap();
            let (status, obj) = highs_mip_from_file(&path);
            match oracle.optimum {
                Some(opt) => {
                    assert_eq!(
                        status,
                        highs_sys::MODEL_STATUS_OPTIMAL as i32,
                        "seed {}",
                        seed
                    );
                    assert!(
                        (obj - opt).abs() < 1e-6,
                        "seed {} {:?}: {} vs {}",
                        seed,
                        kind,
                        obj,
                        opt
                    );
                    checked += 1;
                }
                None => assert_eq!(
                    status,
                    highs_sys::MODEL_STATUS_INFEASIBLE as i32,
                    "seed {}",
                    seed
                ),
            }
        }
    }
    assert!(checked > 0);
}
