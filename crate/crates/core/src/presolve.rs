//! Reduced cost fixing on power-level variables and the big-M tightening it enables.
//!
//! With an LP bound `lb`, a known solution of cost `ub`, and reduced cost
//! `rc` of a level variable at zero, any solution switching that level on
//! costs at least `lb + rc`; when that exceeds `ub` the level can be dropped.
//! Dropped levels cap the power a transmitter can emit, which shrinks the
//! big-M of every SINR row it interferes with (tier `M'`). The incumbent cost
//! also caps how many transmitters can be on at once, so only the strongest
//! few interferers need to be counted (tier `M''`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::formulation::{BigMTable, BigMTier, InterfererSets, MilpModel, VarRole};
use crate::lp::{LpResult, LpStatus};
use crate::{Instance, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PresolveError {
    #[error("no fixing gap: ub {ub} <= lb {lb}")]
    NoGap { lb: f64, ub: f64 },
    #[error("reduced cost fixing needs an optimal LP, got {0}")]
    NotOptimal(LpStatus),
    #[error("LP result has {got} columns, model has {want}")]
    Dimension { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcfConfig<S> {
    /// Slack in the comparison of a reduced cost against `ub - lb`.
    pub tolerance: S,
    /// Also fix when the reduced cost equals the gap. This keeps at least one
    /// optimum but may remove others.
    pub fix_ties: bool,
}

impl<S: Scalar> Default for RcfConfig<S> {
    fn default() -> Self {
        Self {
            tolerance: S::lit(1e-9),
            fix_ties: false,
        }
    }
}

/// Outcome of reduced cost fixing plus the statistics of the tightened model.
#[derive(Debug, Clone, PartialEq)]
pub struct RcfReport<S> {
    /// `(b, l)` pairs fixed to zero.
    pub fixed_z: BTreeSet<(usize, usize)>,
    /// Transmitters with at least one fixed level (B^R).
    pub affected: BTreeSet<usize>,
    /// Levels left for each affected transmitter (L^R_b).
    pub surviving_levels: BTreeMap<usize, Vec<usize>>,
    /// Highest power each transmitter can still emit; zero when all levels are fixed.
    pub power_caps: Vec<S>,
    pub lb: S,
    pub ub: S,
    pub gamma: Option<usize>,
    pub bigm_before: Option<S>,
    pub bigm_after: Option<S>,
    pub nonzeros_before: Option<usize>,
    pub nonzeros_after: Option<usize>,
    /// Assignment pairs fixed to zero by propagation.
    pub fixed_x: BTreeSet<(usize, usize)>,
    /// Propagation proved that no solution of cost at most `ub` exists.
    pub infeasible: bool,
}

fn power_caps<S: Scalar>(inst: &Instance<S>, surviving: &BTreeMap<usize, Vec<usize>>) -> Vec<S> {
    (0..inst.n_transmitters())
        .map(|b| match surviving.get(&b) {
            None => inst.max_power(),
            Some(levels) => levels
                .iter()
                .map(|&l| inst.power(l))
                .fold(S::zero(), S::max),
        })
        .collect()
}

/// Fixes every level variable whose reduced cost exceeds `ub - lb`.
pub fn reduced_cost_fix<S: Scalar>(
    inst: &Instance<S>,
    model: &MilpModel<S>,
    lp: &LpResult<S>,
    lb: S,
    ub: S,
    cfg: &RcfConfig<S>,
) -> Result<RcfReport<S>, PresolveError> {
    if ub <= lb {
        return Err(PresolveError::NoGap {
            lb: lb.as_f64(),
            ub: ub.as_f64(),
        });
    }
    if lp.status != LpStatus::Optimal {
        return Err(PresolveError::NotOptimal(lp.status));
    }
    if lp.reduced_costs.len() != model.n_cols() {
        return Err(PresolveError::Dimension {
            got: lp.reduced_costs.len(),
            want: model.n_cols(),
        });
    }
    let gap = ub - lb;
    let mut fixed_z = BTreeSet::new();
    for (j, col) in model.columns().iter().enumerate() {
        let VarRole::Z { b, l } = col.role else {
            continue;
        };
        let rc = lp.reduced_costs[j];
        let fix = if cfg.fix_ties {
            rc >= gap - cfg.tolerance
        } else {
            rc > gap + cfg.tolerance
        };
        if fix {
            fixed_z.insert((b, l));
        }
    }
    // Levels already removed from a restricted model at zero count as fixed too.
    for rem in model.removed() {
        if let VarRole::Z { b, l } = rem.role {
            if rem.value == S::zero() {
                fixed_z.insert((b, l));
            }
        }
    }
    Ok(report_for(inst, fixed_z, lb, ub))
}

/// Report for an explicit set of fixed levels.
pub fn report_for<S: Scalar>(
    inst: &Instance<S>,
    fixed_z: BTreeSet<(usize, usize)>,
    lb: S,
    ub: S,
) -> RcfReport<S> {
    let affected: BTreeSet<usize> = fixed_z.iter().map(|&(b, _)| b).collect();
    let surviving_levels: BTreeMap<usize, Vec<usize>> = affected
        .iter()
        .map(|&b| {
            (
                b,
                (0..inst.n_levels())
                    .filter(|l| !fixed_z.contains(&(b, *l)))
                    .collect(),
            )
        })
        .collect();
    let power_caps = power_caps(inst, &surviving_levels);
    RcfReport {
        fixed_z,
        affected,
        surviving_levels,
        power_caps,
        lb,
        ub,
        gamma: None,
        bigm_before: None,
        bigm_after: None,
        nonzeros_before: None,
        nonzeros_after: None,
        fixed_x: BTreeSet::new(),
        infeasible: false,
    }
}

/// Big-M with every interferer capped at its surviving maximum power.
pub fn tighten_big_m_prime<S: Scalar>(inst: &Instance<S>, report: &RcfReport<S>) -> BigMTable<S> {
    BigMTable::with_power_caps(inst, report.power_caps.clone(), BigMTier::Prime)
}

/// Most transmitters a solution of cost at most `ub` can switch on.
pub fn gamma_from_ub<S: Scalar>(inst: &Instance<S>, ub: S) -> usize {
    if ub < S::zero() {
        return 0;
    }
    let ratio = (ub / inst.cost(0) + S::lit(1e-9)).floor();
    ratio
        .to_usize()
        .unwrap_or(usize::MAX)
        .min(inst.n_transmitters())
}

/// The `gamma` transmitters of largest `a[t][b] * cap_b`, strongest first, lowest index on ties.
pub fn strongest_interferers<S: Scalar>(
    inst: &Instance<S>,
    caps: &[S],
    t: usize,
    gamma: usize,
) -> Vec<usize> {
    ranked(inst, caps, t).into_iter().take(gamma).collect()
}

fn ranked<S: Scalar>(inst: &Instance<S>, caps: &[S], t: usize) -> Vec<usize> {
    let gains = inst.gains_at(t);
    let mut order: Vec<usize> = (0..inst.n_transmitters()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (gains[a] * caps[a], gains[b] * caps[b]);
        sb.partial_cmp(&sa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Big-M counting only the `gamma` strongest interferers other than the
/// serving transmitter. When the server is itself one of the `gamma`
/// strongest, the next one in the ranking takes its place: with the server
/// off, `gamma` other transmitters may still be on. Valid for every solution
/// that switches on at most `gamma` transmitters.
pub fn tighten_big_m_double_prime<S: Scalar>(
    inst: &Instance<S>,
    report: &RcfReport<S>,
    gamma: usize,
) -> BigMTable<S> {
    let (nt, nb) = (inst.n_testpoints(), inst.n_transmitters());
    let caps = &report.power_caps;
    let delta = inst.threshold();
    let floor = delta * inst.noise();
    let mut values = Vec::with_capacity(nt * nb);
    let mut sets = Vec::with_capacity(nt);
    let mut runner_up = Vec::with_capacity(nt);
    for t in 0..nt {
        let order = ranked(inst, caps, t);
        let gains = inst.gains_at(t);
        let score = |b: usize| gains[b] * caps[b];
        let next = order.get(gamma).copied();
        for beta in 0..nb {
            let interf = order
                .iter()
                .filter(|&&b| b != beta)
                .take(gamma)
                .fold(S::zero(), |acc, &b| acc + score(b));
            // Summed in another order, the gamma = |B| case can land an ulp
            // above M'; both are valid so keep the smaller.
            let all = (0..nb)
                .filter(|&b| b != beta)
                .fold(S::zero(), |acc, b| acc + caps[b] * gains[b]);
            values.push((floor + delta * interf).min(floor + delta * all));
        }
        sets.push(order[..gamma.min(nb)].to_vec());
        runner_up.push(next);
    }
    BigMTable::from_parts(
        nt,
        nb,
        values,
        BigMTier::DoublePrime,
        caps.clone(),
        Some(InterfererSets {
            gamma,
            sets,
            runner_up,
        }),
    )
}

/// Column fixings implied by fixed levels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Propagation<S> {
    /// Column index of `model` to its fixed value.
    pub fixings: BTreeMap<usize, S>,
    pub fixed_x: BTreeSet<(usize, usize)>,
    /// Fewer testpoints than the coverage target can still be served.
    pub infeasible: bool,
}

/// A transmitter with every level fixed off cannot serve anybody; if that
/// leaves fewer servable testpoints than required, the model is infeasible.
pub fn propagate_fixings<S: Scalar>(
    model: &MilpModel<S>,
    fixed_z: &BTreeSet<(usize, usize)>,
    coverage: usize,
) -> Propagation<S> {
    let dims = model.dims();
    let mut out = Propagation::default();
    let mut dead = vec![false; dims.n_transmitters];
    for (b, flag) in dead.iter_mut().enumerate() {
        *flag = (0..dims.n_levels).all(|l| fixed_z.contains(&(b, l)));
    }
    for &(b, l) in fixed_z {
        if let Some(j) = model.column_of(VarRole::Z { b, l }) {
            out.fixings.insert(j, S::zero());
        }
    }
    let mut servable = 0;
    for t in 0..dims.n_testpoints {
        let mut any = false;
        for (b, &is_dead) in dead.iter().enumerate() {
            let free_here = model.column_of(VarRole::X { t, b }).is_some();
            if is_dead {
                out.fixed_x.insert((t, b));
                if let Some(j) = model.column_of(VarRole::X { t, b }) {
                    out.fixings.insert(j, S::zero());
                }
            } else if free_here {
                any = true;
            }
        }
        if any {
            servable += 1;
        }
    }
    out.infeasible = servable < coverage;
    out
}

impl<S: Scalar> RcfReport<S> {
    pub fn propagate(&mut self, model: &MilpModel<S>, coverage: usize) -> Propagation<S> {
        let p = propagate_fixings(model, &self.fixed_z, coverage);
        self.fixed_x = p.fixed_x.clone();
        self.infeasible = p.infeasible;
        p
    }

    /// Plain-text report: bounds, counts, big-M and nonzero statistics, fixed list.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let opt =
            |v: Option<S>| v.map_or_else(|| "-".to_string(), |v| format!("{:.6e}", v.as_f64()));
        let optn = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let _ = writeln!(s, "lb              {}", self.lb);
        let _ = writeln!(s, "ub              {}", self.ub);
        let _ = writeln!(s, "gamma           {}", optn(self.gamma));
        let _ = writeln!(s, "fixed levels    {}", self.fixed_z.len());
        let _ = writeln!(s, "affected        {}", self.affected.len());
        let _ = writeln!(s, "fixed assign    {}", self.fixed_x.len());
        let _ = writeln!(s, "infeasible      {}", self.infeasible);
        let _ = writeln!(
            s,
            "nonzeros        {} -> {}",
            optn(self.nonzeros_before),
            optn(self.nonzeros_after)
        );
        let _ = writeln!(
            s,
            "max big-M       {} -> {}",
            opt(self.bigm_before),
            opt(self.bigm_after)
        );
        let _ = writeln!(s, "fixed:");
        for (b, l) in &self.fixed_z {
            let _ = writeln!(s, "  Z_{}_{}", b, l);
        }
        s
    }
}

impl<S: Scalar> fmt::Display for RcfReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{big_m_base, build_natural};
    use crate::instance::fixtures::{ex1, ex2};
    use crate::InstanceSpec;

    fn fake_lp(model: &MilpModel<f64>, rc: &[(VarRole, f64)]) -> LpResult<f64> {
        let mut reduced = vec![0.0; model.n_cols()];
        for (role, v) in rc {
            reduced[model.column_of(*role).unwrap()] = *v;
        }
        LpResult {
            status: LpStatus::Optimal,
            objective: 3.2,
            primal: vec![0.0; model.n_cols()],
            reduced_costs: reduced,
            iterations: 0,
            diagnostics: None,
        }
    }

    #[test]
    fn fixing_rule() {
        let inst = ex2(1);
        let m = build_natural(&inst, &big_m_base(&inst)).unwrap();
        let lp = fake_lp(
            &m,
            &[
                (VarRole::Z { b: 0, l: 1 }, 1.5),
                (VarRole::Z { b: 1, l: 1 }, 0.5),
            ],
        );
        let r = reduced_cost_fix(&inst, &m, &lp, 3.2, 4.0, &RcfConfig::default()).unwrap();
        assert_eq!(r.fixed_z.iter().copied().collect::<Vec<_>>(), [(0, 1)]);
        assert_eq!(r.affected.iter().copied().collect::<Vec<_>>(), [0]);
        assert_eq!(r.surviving_levels[&0], [0]);
        assert_eq!(r.power_caps, [10.0, 20.0]);
        assert!(matches!(
            reduced_cost_fix(&inst, &m, &lp, 4.0, 4.0, &RcfConfig::default()),
            Err(PresolveError::NoGap { .. })
        ));
    }

    #[test]
    fn ties_fixed_only_on_request() {
        let inst = ex2(1);
        let m = build_natural(&inst, &big_m_base(&inst)).unwrap();
        let lp = fake_lp(&m, &[(VarRole::Z { b: 0, l: 1 }, 1.0)]);
        let strict = reduced_cost_fix(&inst, &m, &lp, 1.0, 2.0, &RcfConfig::default()).unwrap();
        assert!(strict.fixed_z.is_empty());
        let cfg = RcfConfig {
            fix_ties: true,
            ..RcfConfig::default()
        };
        let ties = reduced_cost_fix(&inst, &m, &lp, 1.0, 2.0, &cfg).unwrap();
        assert_eq!(ties.fixed_z.len(), 1);
    }

    #[test]
    fn prime_tier_on_ex2() {
        let inst = ex2(1);
        let base = big_m_base(&inst);
        assert_eq!(base.get(0, 0), 11.0);
        let r = report_for(&inst, [(1, 1)].into_iter().collect(), 0.0, 1.0);
        let mp = tighten_big_m_prime(&inst, &r);
        assert_eq!(mp.get(0, 0), 6.0);
        assert_eq!(mp.tier(), BigMTier::Prime);
        assert!(mp.dominated_by(&base));

        let none = report_for(&inst, BTreeSet::new(), 0.0, 1.0);
        assert_eq!(tighten_big_m_prime(&inst, &none).values(), base.values());

        let all = report_for(&inst, [(1, 0), (1, 1)].into_iter().collect(), 0.0, 1.0);
        assert_eq!(all.power_caps[1], 0.0);
        assert_eq!(tighten_big_m_prime(&inst, &all).get(0, 0), 1.0);
    }

    #[test]
    fn gamma_values() {
        let mk = |costs: Vec<f64>, nb: usize| {
            Instance::new(InstanceSpec {
                name: "g".into(),
                n_transmitters: nb,
                n_testpoints: 1,
                powers: (1..=costs.len()).map(|p| p as f64).collect(),
                costs,
                fading: vec![1.0; nb],
                noise: 1.0,
                threshold: 1.0,
                coverage: 0,
                scale_factor: 1.0,
            })
            .unwrap()
        };
        assert_eq!(gamma_from_ub(&mk(vec![1.0, 2.0, 4.0], 10), 4.0), 4);
        assert_eq!(gamma_from_ub(&mk(vec![1.0, 2.0, 4.0], 10), 0.5), 0);
        assert_eq!(gamma_from_ub(&mk(vec![2.0, 3.0], 2), 7.0), 2);
    }

    #[test]
    fn interferer_ranking() {
        let inst = ex2(1);
        let caps = [20.0, 10.0];
        assert_eq!(strongest_interferers(&inst, &caps, 0, 1), [0]);
        assert_eq!(strongest_interferers(&inst, &caps, 0, 2), [0, 1]);
        assert!(strongest_interferers(&inst, &caps, 0, 0).is_empty());
        // equal scores: lowest index first
        assert_eq!(strongest_interferers(&ex1(1), &[1.0, 4.0], 0, 1), [0]);
    }

    #[test]
    fn double_prime_tier_on_ex2() {
        let inst = ex2(1);
        let r = report_for(&inst, [(1, 1)].into_iter().collect(), 0.0, 1.0);
        let mp = tighten_big_m_prime(&inst, &r);
        let m2 = tighten_big_m_double_prime(&inst, &r, 1);
        // the server b0 is the strongest, so b1 stands in for it
        assert_eq!(m2.get(0, 0), 6.0);
        assert_eq!(m2.get(0, 1), 41.0);
        assert!(m2.dominated_by(&mp));
        assert_eq!(m2.interferers().unwrap().sets[0], [0]);
        let full = tighten_big_m_double_prime(&inst, &r, 2);
        assert_eq!(full.values(), mp.values());
        let zero = tighten_big_m_double_prime(&inst, &r, 0);
        assert!(zero.values().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn propagation() {
        let inst = ex2(1);
        let m = build_natural(&inst, &big_m_base(&inst)).unwrap();
        let p = propagate_fixings::<f64>(&m, &[(1, 0), (1, 1)].into_iter().collect(), 1);
        assert_eq!(
            p.fixed_x.iter().copied().collect::<Vec<_>>(),
            [(0, 1), (1, 1)]
        );
        assert_eq!(p.fixings.len(), 4);
        assert!(!p.infeasible);

        let p = propagate_fixings::<f64>(&m, &[(0, 0)].into_iter().collect(), 1);
        assert!(p.fixed_x.is_empty());

        let all = [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().collect();
        assert!(propagate_fixings::<f64>(&m, &all, 1).infeasible);
        assert!(!propagate_fixings::<f64>(&m, &all, 0).infeasible);
    }

    #[test]
    fn report_text() {
        let inst = ex2(1);
        let mut r = report_for(&inst, [(1, 1)].into_iter().collect(), 1.0, 2.0);
        r.bigm_before = Some(41.0);
        r.bigm_after = Some(21.0);
        let text = r.render();
        assert!(text.contains("fixed levels    1"));
        assert!(text.contains("Z_1_1"));
        assert!(text.contains("4.100000e1 -> 2.100000e1"));
    }
}
