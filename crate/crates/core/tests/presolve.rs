mod common;

use std::collections::BTreeSet;

use common::{sinr_rhs, small_suite};
use sitepower::bnb::{branch_and_bound, BnbConfig};
use sitepower::formulation::{big_m_base, build, FormulationKind};
use sitepower::lp::{BoundOverrides, DenseSimplex, LpBackend};
use sitepower::oracle::{activations, brute_force, DEFAULT_CAP};
use sitepower::presolve::{
    gamma_from_ub, reduced_cost_fix, report_for, tighten_big_m_double_prime, tighten_big_m_prime,
    RcfConfig,
};
use sitepower::Instance64;

/// Every subset of level pairs, for instances small enough to afford it.
fn fixings(inst: &Instance64) -> Vec<BTreeSet<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..inst.n_transmitters())
        .flat_map(|b| (0..inst.n_levels()).map(move |l| (b, l)))
        .collect();
    let step = if pairs.len() > 6 { 7 } else { 1 };
    (0u32..1 << pairs.len())
        .step_by(step)
        .map(|m| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| m >> k & 1 == 1)
                .map(|(_, p)| *p)
                .collect()
        })
        .collect()
}

#[test]
fn tiers_are_monotone() {
    for inst in small_suite(30, 4) {
        let base = big_m_base(&inst);
        for fixed in fixings(&inst) {
            let r = report_for(&inst, fixed, 0.0, 1.0);
            let prime = tighten_big_m_prime(&inst, &r);
            assert!(prime.dominated_by(&base));
            for gamma in 0..=inst.n_transmitters() {
                let dp = tighten_big_m_double_prime(&inst, &r, gamma);
                assert!(dp.dominated_by(&prime), "{} gamma {}", inst.name(), gamma);
            }
        }
    }
}

#[test]
fn double_prime_is_redundant_for_small_activations() {
    for inst in small_suite(30, 4) {
        for fixed in fixings(&inst) {
            let r = report_for(&inst, fixed.clone(), 0.0, 1.0);
            for gamma in 0..=inst.n_transmitters() {
                let dp = tighten_big_m_double_prime(&inst, &r, gamma);
                let allowed = activations(inst.n_transmitters(), inst.n_levels()).filter(|a| {
                    a.iter().flatten().count() <= gamma
                        && a.iter()
                            .enumerate()
                            .all(|(b, l)| l.is_none_or(|l| !fixed.contains(&(b, l))))
                });
                for act in allowed {
                    for t in 0..inst.n_testpoints() {
                        for beta in 0..inst.n_transmitters() {
                            let rhs = sinr_rhs(&inst, &act, t, beta);
                            let m = dp.get(t, beta);
                            assert!(
                                rhs <= m * (1.0 + 1e-10),
                                "{} gamma {} act {:?} t{} b{}: {} > {}",
                                inst.name(),
                                gamma,
                                act,
                                t,
                                beta,
                                rhs,
                                m
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Fixing from the root LP with an arbitrary valid `ub`, then solving the
/// tightened model exactly, must land on the oracle optimum.
#[test]
fn fixing_keeps_the_optimum() {
    let backend = DenseSimplex::default();
    let mut fixed_any = 0;
    for inst in small_suite(100, 4) {
        let oracle = brute_force(&inst, DEFAULT_CAP).unwrap();
        let Some(opt) = oracle.optimum else { continue };
        let kind = FormulationKind::Natural;
        let base = build(kind, &inst, &big_m_base(&inst)).unwrap();
        let lp = backend.open(&base).solve(&BoundOverrides::new());
        let lb = lp.objective;
        for slack in [0.0, 0.5, 1.0, 3.0] {
            let ub = opt + slack;
            if ub <= lb {
                continue;
            }
            for cfg in [
                RcfConfig::default(),
                RcfConfig {
                    fix_ties: true,
                    ..RcfConfig::default()
                },
            ] {
                let mut r = reduced_cost_fix(&inst, &base, &lp, lb, ub, &cfg).unwrap();
                if !cfg.fix_ties {
                    for &(b, l) in &r.fixed_z {
                        assert!(
                            oracle.optimum_without(b, l, inst.n_levels()),
                            "{} fixed ({}, {})",
                            inst.name(),
                            b,
                            l
                        );
                    }
                }
                fixed_any += r.fixed_z.len();
                let gamma = gamma_from_ub(&inst, ub);
                let bigm = tighten_big_m_double_prime(&inst, &r, gamma);
                let tight = build(kind, &inst, &bigm).unwrap();
                let prop = r.propagate(&tight, inst.coverage());
                if prop.infeasible {
                    assert!(
                        cfg.fix_ties && ub == opt,
                        "{} ub {}: propagation cut every optimum",
                        inst.name(),
                        ub
                    );
                    continue;
                }
                let res = branch_and_bound(
                    &inst,
                    &tight.restrict(&prop.fixings),
                    &backend,
                    &BnbConfig::default(),
                );
                // The tie rule may cut every solution of cost `ub`; the
                // incumbent that produced `ub` is then the answer.
                let got = match res.objective {
                    Some(v) => v.min(ub),
                    None if cfg.fix_ties => ub,
                    None => panic!(
                        "{} ub {}: tightened model lost every optimum",
                        inst.name(),
                        ub
                    ),
                };
                assert!(
                    (got - opt).abs() < 1e-9,
                    "{} ub {} ties {}: {} vs {}",
                    inst.name(),
                    ub,
                    cfg.fix_ties,
                    got,
                    opt
                );
            }
        }
    }
    assert!(fixed_any > 0, "the suite never fixed anything");
}
