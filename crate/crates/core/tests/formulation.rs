mod common;

use std::collections::BTreeSet;

use common::{level_masks, row_holds, sinr_rhs, small_suite};
use sitepower::formulation::{big_m_base, build, FormulationKind, MilpModel, RowTag, VarRole};
use sitepower::instgen::scale;
use sitepower::oracle::{activations, brute_force, DEFAULT_CAP};
use sitepower::presolve::{report_for, strongest_interferers};
use sitepower::{is_served, Instance64};

#[test]
fn base_big_m_dominates_every_activation() {
    for inst in small_suite(40, 4) {
        let m = big_m_base(&inst);
        for act in activations(inst.n_transmitters(), inst.n_levels()) {
            for t in 0..inst.n_testpoints() {
                for beta in 0..inst.n_transmitters() {
                    let rhs = sinr_rhs(&inst, &act, t, beta);
                    let bound = m.get(t, beta);
                    assert!(
                        rhs <= bound * (1.0 + 1e-10),
                        "{} t{} b{}: {} > {}",
                        inst.name(),
                        t,
                        beta,
                        rhs,
                        bound
                    );
                }
            }
        }
    }
}

/// For a fixed z, the x rows of testpoint `t` that some w completes.
fn feasible_rows(model: &MilpModel<f64>, inst: &Instance64, z: &[bool], t: usize) -> BTreeSet<u32> {
    let (nb, nl) = (inst.n_transmitters(), inst.n_levels());
    let rows: Vec<usize> = model
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| match r.tag {
            RowTag::Sinr { t: rt, .. }
            | RowTag::OneServer { t: rt }
            | RowTag::Vub { t: rt, .. }
            | RowTag::WDef { t: rt, .. } => rt == t,
            _ => false,
        })
        .map(|(i, _)| i)
        .collect();
    let has_w = model.column_of(VarRole::W { t, b: 0 }).is_some();
    let w_masks: u32 = if has_w { 1 << nb } else { 1 };
    let mut primal = vec![0.0; model.n_cols()];
    for b in 0..nb {
        for l in 0..nl {
            primal[model.column_of(VarRole::Z { b, l }).unwrap()] =
                if z[b * nl + l] { 1.0 } else { 0.0 };
        }
    }
    let mut out = BTreeSet::new();
    for x in 0u32..1 << nb {
        for b in 0..nb {
            primal[model.column_of(VarRole::X { t, b }).unwrap()] = f64::from(x >> b & 1);
        }
        let extendable = (0..w_masks).any(|w| {
            if has_w {
                for b in 0..nb {
                    primal[model.column_of(VarRole::W { t, b }).unwrap()] = f64::from(w >> b & 1);
                }
            }
            rows.iter().all(|&i| row_holds(model, i, &primal))
        });
        if extendable {
            out.insert(x);
        }
    }
    out
}

fn one_level_ok(model: &MilpModel<f64>, inst: &Instance64, z: &[bool]) -> bool {
    let nl = inst.n_levels();
    let mut primal = vec![0.0; model.n_cols()];
    for b in 0..inst.n_transmitters() {
        for l in 0..nl {
            primal[model.column_of(VarRole::Z { b, l }).unwrap()] =
                if z[b * nl + l] { 1.0 } else { 0.0 };
        }
    }
    model
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| matches!(r.tag, RowTag::OneLevel { .. }))
        .all(|(i, _)| row_holds(model, i, &primal))
}

#[test]
fn reformulation_has_the_same_projection_and_optimum() {
    for inst in small_suite(30, 3) {
        let (nb, nl) = (inst.n_transmitters(), inst.n_levels());
        let bigm = big_m_base(&inst);
        let natural = build(FormulationKind::Natural, &inst, &bigm).unwrap();
        let reform = build(FormulationKind::Reformulated, &inst, &bigm).unwrap();
        let mut best: Option<f64> = None;
        for z in level_masks(nb, nl) {
            let ok = one_level_ok(&natural, &inst, &z);
            assert_eq!(ok, one_level_ok(&reform, &inst, &z));
            let single = (0..nb).all(|b| (0..nl).filter(|&l| z[b * nl + l]).count() <= 1);
            assert_eq!(ok, single);
            if !ok {
                continue;
            }
            let act: Vec<Option<usize>> =
                (0..nb).map(|b| (0..nl).find(|&l| z[b * nl + l])).collect();
            let mut servable = 0;
            for t in 0..inst.n_testpoints() {
                let a = feasible_rows(&natural, &inst, &z, t);
                let b = feasible_rows(&reform, &inst, &z, t);
                assert_eq!(a, b, "{} z {:?} t {}", inst.name(), z, t);
                // Rows allowed by the model are exactly "nobody" or one server meeting the threshold.
                let expected: BTreeSet<u32> = std::iter::once(0)
                    .chain(
                        (0..nb)
                            .filter(|&s| act[s].is_some() && is_served(&inst, &act, t, s))
                            .map(|s| 1 << s),
                    )
                    .collect();
                assert_eq!(a, expected, "{} z {:?} t {}", inst.name(), z, t);
                if a.len() > 1 {
                    servable += 1;
                }
            }
            if servable >= inst.coverage() {
                let cost: f64 = act.iter().flatten().map(|&l| inst.cost(l)).sum();
                best = Some(best.map_or(cost, |c: f64| c.min(cost)));
            }
        }
        let oracle = brute_force(&inst, DEFAULT_CAP).unwrap();
        assert_eq!(best, oracle.optimum, "{}", inst.name());
    }
}

#[test]
fn big_m_scales_with_the_instance() {
    for inst in small_suite(20, 4) {
        let f = 1e-10;
        let s = scale(&inst, f);
        let (m, ms) = (big_m_base(&inst), big_m_base(&s));
        for (a, b) in m.values().iter().zip(ms.values()) {
            assert!((a / f - b).abs() <= 1e-12 * b.abs(), "{} vs {}", a / f, b);
        }
        let caps = vec![inst.max_power(); inst.n_transmitters()];
        for t in 0..inst.n_testpoints() {
            for g in 0..=inst.n_transmitters() {
                assert_eq!(
                    strongest_interferers(&inst, &caps, t, g),
                    strongest_interferers(&s, &caps, t, g)
                );
            }
        }
        let r = report_for(&inst, BTreeSet::new(), 0.0, 1.0);
        assert_eq!(r.power_caps, caps);
    }
}
