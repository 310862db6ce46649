//! Solver frameworks: formulation choice, branching priorities and the
//! optional reduced-cost-fixing presolve, under the labels of the result tables.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::bnb::{branch_and_bound, BnbConfig, BnbStatus};
use crate::formulation::{
    big_m_base, build, BigMTable, BigMTier, FormulationKind, MilpModel, PriorityScheme,
};
use crate::heuristic::{fallback_upper_bound, fixing_heuristic_from_lp, HeuristicConfig};
use crate::lp::{BoundOverrides, LpBackend, LpStatus};
use crate::presolve::{
    gamma_from_ub, reduced_cost_fix, tighten_big_m_double_prime, RcfConfig, RcfReport,
};
use crate::{Instance, Scalar, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Framework {
    N,
    NPbx,
    R,
    RPbw,
    NRcf,
    RRcf,
    RPbwRcf,
}

impl Framework {
    pub const ALL: [Framework; 7] = [
        Framework::N,
        Framework::NPbx,
        Framework::R,
        Framework::RPbw,
        Framework::NRcf,
        Framework::RRcf,
        Framework::RPbwRcf,
    ];

    /// Table label, e.g. `R+PBw+RCF`.
    pub fn label(&self) -> &'static str {
        match self {
            Framework::N => "N",
            Framework::NPbx => "N+PBx",
            Framework::R => "R",
            Framework::RPbw => "R+PBw",
            Framework::NRcf => "N+RCF",
            Framework::RRcf => "R+RCF",
            Framework::RPbwRcf => "R+PBw+RCF",
        }
    }

    /// Identifier form, e.g. `R_PBW_RCF`.
    pub fn id(&self) -> &'static str {
        match self {
            Framework::N => "N",
            Framework::NPbx => "N_PBX",
            Framework::R => "R",
            Framework::RPbw => "R_PBW",
            Framework::NRcf => "N_RCF",
            Framework::RRcf => "R_RCF",
            Framework::RPbwRcf => "R_PBW_RCF",
        }
    }

    pub fn kind(&self) -> FormulationKind {
        match self {
            Framework::N | Framework::NPbx | Framework::NRcf => FormulationKind::Natural,
            _ => FormulationKind::Reformulated,
        }
    }

    pub fn scheme(&self) -> PriorityScheme {
        match self {
            Framework::NPbx => PriorityScheme::PreferX,
            Framework::RPbw | Framework::RPbwRcf => PriorityScheme::PreferW,
            _ => PriorityScheme::Uniform,
        }
    }

    pub fn uses_rcf(&self) -> bool {
        matches!(self, Framework::NRcf | Framework::RRcf | Framework::RPbwRcf)
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown framework '{0}' (expected one of N, N+PBx, R, R+PBw, N+RCF, R+RCF, R+PBw+RCF)")]
pub struct UnknownFramework(pub String);

impl FromStr for Framework {
    type Err = UnknownFramework;

    /// Accepts table labels and identifiers, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('+', "_");
        Framework::ALL
            .into_iter()
            .find(|f| f.id() == key)
            .ok_or_else(|| UnknownFramework(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct FrameworkConfig<S> {
    pub bnb: BnbConfig<S>,
    pub heuristic: HeuristicConfig,
    pub rcf: RcfConfig<S>,
}

impl<S: Scalar> Default for FrameworkConfig<S> {
    fn default() -> Self {
        Self {
            bnb: BnbConfig::default(),
            heuristic: HeuristicConfig::default(),
            rcf: RcfConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// Node or time limit reached; the objective, if any, is unproven.
    Limit,
    Failed(String),
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Optimal => f.write_str("optimal"),
            SolveStatus::Infeasible => f.write_str("infeasible"),
            SolveStatus::Limit => f.write_str("limit"),
            SolveStatus::Failed(m) => write!(f, "failed: {}", m),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport<S> {
    pub framework: Framework,
    pub status: SolveStatus,
    pub objective: Option<S>,
    pub solution: Option<Solution>,
    pub nodes: usize,
    pub gap: S,
    pub total_time: Duration,
    /// Time of the root LP giving the lower bound (RCF frameworks).
    pub lb_time: Option<Duration>,
    pub heuristic_time: Option<Duration>,
    /// Time to solve the tightened model.
    pub reduced_time: Option<Duration>,
    /// Reduced cost fixing statistics, when it ran.
    pub rcf: Option<RcfReport<S>>,
    pub nonzeros: usize,
    pub max_bigm: S,
    /// Node counts are reproducible run to run (single-threaded search).
    pub deterministic: bool,
}

impl<S: Scalar> SolveReport<S> {
    pub fn proven(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

fn status_of(s: &BnbStatus) -> SolveStatus {
    match s {
        BnbStatus::Optimal => SolveStatus::Optimal,
        BnbStatus::Infeasible => SolveStatus::Infeasible,
        BnbStatus::NodeLimit | BnbStatus::TimeLimit => SolveStatus::Limit,
        BnbStatus::Failed(m) => SolveStatus::Failed(m.clone()),
    }
}

/// The presolve stage of an RCF framework.
#[derive(Debug, Clone)]
pub struct Presolved<S> {
    pub base: MilpModel<S>,
    pub base_bigm: BigMTable<S>,
    pub lb: Option<S>,
    pub lb_time: Duration,
    pub heuristic_time: Duration,
    /// Best known solution and its cost.
    pub incumbent: Option<(Solution, S)>,
    pub outcome: PresolveOutcome<S>,
}

#[derive(Debug, Clone)]
pub enum PresolveOutcome<S> {
    /// The root LP is infeasible.
    Infeasible,
    /// The LP backend failed.
    Failed(String),
    /// No valid upper bound: solve the untightened model.
    Unavailable,
    /// The incumbent matches the LP bound.
    Closed,
    /// Tightened and restricted model.
    Tightened {
        report: RcfReport<S>,
        bigm: BigMTable<S>,
        model: MilpModel<S>,
    },
}

/// Root LP, fixing heuristic, reduced cost fixing, `M''` and propagation.
pub fn presolve<S: Scalar>(
    inst: &Instance<S>,
    kind: FormulationKind,
    scheme: PriorityScheme,
    backend: &dyn LpBackend<S>,
    cfg: &FrameworkConfig<S>,
) -> Presolved<S> {
    let base_bigm = big_m_base(inst);
    let base = build(kind, inst, &base_bigm)
        .expect("big-M built from the instance")
        .with_priorities(scheme);
    let t0 = Instant::now();
    let lp = backend.open(&base).solve(&BoundOverrides::new());
    let lb_time = t0.elapsed();
    let mut out = Presolved {
        base,
        base_bigm,
        lb: None,
        lb_time,
        heuristic_time: Duration::ZERO,
        incumbent: None,
        outcome: PresolveOutcome::Unavailable,
    };
    match lp.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            out.outcome = PresolveOutcome::Infeasible;
            return out;
        }
        other => {
            out.outcome = PresolveOutcome::Failed(
                lp.diagnostics.clone().unwrap_or_else(|| other.to_string()),
            );
            return out;
        }
    }
    let lb = lp.objective + out.base.removed_cost();
    out.lb = Some(lb);

    let t1 = Instant::now();
    let heur = fixing_heuristic_from_lp(inst, &out.base, backend, &cfg.heuristic, &lp);
    out.heuristic_time = t1.elapsed();
    out.incumbent = match heur {
        Ok(h) => h.solution.zip(h.ub),
        Err(_) => None,
    };
    if out.incumbent.is_none() {
        out.incumbent = fallback_upper_bound(inst);
    }
    let Some((_, ub)) = out.incumbent.clone() else {
        return out;
    };
    if ub <= lb + cfg.bnb.gap_tol {
        out.outcome = PresolveOutcome::Closed;
        return out;
    }
    let mut report = match reduced_cost_fix(inst, &out.base, &lp, lb, ub, &cfg.rcf) {
        Ok(r) => r,
        Err(_) => return out,
    };
    let gamma = gamma_from_ub(inst, ub);
    report.gamma = Some(gamma);
    let bigm = tighten_big_m_double_prime(inst, &report, gamma);
    let tightened = build(kind, inst, &bigm)
        .expect("big-M built from the instance")
        .with_priorities(scheme);
    let prop = report.propagate(&tightened, inst.coverage());
    let model = tightened.restrict(&prop.fixings);
    report.bigm_before = Some(out.base_bigm.max());
    report.bigm_after = Some(bigm.max());
    report.nonzeros_before = Some(out.base.nonzeros());
    report.nonzeros_after = Some(model.nonzeros());
    out.outcome = PresolveOutcome::Tightened {
        report,
        bigm,
        model,
    };
    out
}

pub fn solve_framework<S: Scalar>(
    inst: &Instance<S>,
    framework: Framework,
    backend: &dyn LpBackend<S>,
    cfg: &FrameworkConfig<S>,
) -> SolveReport<S> {
    let start = Instant::now();
    let (kind, scheme) = (framework.kind(), framework.scheme());
    if !framework.uses_rcf() {
        let bigm = big_m_base(inst);
        let model = build(kind, inst, &bigm)
            .expect("big-M built from the instance")
            .with_priorities(scheme);
        let res = branch_and_bound(inst, &model, backend, &cfg.bnb);
        return SolveReport {
            framework,
            status: status_of(&res.status),
            gap: res.gap(),
            objective: res.objective,
            solution: res.solution,
            nodes: res.nodes,
            total_time: start.elapsed(),
            lb_time: None,
            heuristic_time: None,
            reduced_time: None,
            rcf: None,
            nonzeros: model.nonzeros(),
            max_bigm: bigm.max(),
            deterministic: true,
        };
    }

    let pre = presolve(inst, kind, scheme, backend, cfg);
    let mut report = SolveReport {
        framework,
        status: SolveStatus::Optimal,
        objective: None,
        solution: None,
        nodes: 0,
        gap: S::zero(),
        total_time: Duration::ZERO,
        lb_time: Some(pre.lb_time),
        heuristic_time: Some(pre.heuristic_time),
        reduced_time: None,
        rcf: None,
        nonzeros: pre.base.nonzeros(),
        max_bigm: pre.base_bigm.max(),
        deterministic: true,
    };
    let (model, seed) = match pre.outcome {
        PresolveOutcome::Infeasible => {
            report.status = SolveStatus::Infeasible;
            report.gap = S::infinity();
            report.total_time = start.elapsed();
            return report;
        }
        PresolveOutcome::Failed(msg) => {
            report.status = SolveStatus::Failed(msg);
            report.gap = S::infinity();
            report.total_time = start.elapsed();
            return report;
        }
        PresolveOutcome::Closed => {
            let (sol, ub) = pre.incumbent.expect("closed gap has an incumbent");
            report.objective = Some(ub);
            report.solution = Some(sol);
            report.reduced_time = Some(Duration::ZERO);
            report.total_time = start.elapsed();
            return report;
        }
        PresolveOutcome::Unavailable => (pre.base, pre.incumbent.map(|(s, _)| s)),
        PresolveOutcome::Tightened {
            report: rcf,
            bigm,
            model,
        } => {
            report.nonzeros = model.nonzeros();
            report.max_bigm = bigm.max();
            let infeasible = rcf.infeasible;
            report.rcf = Some(rcf);
            if infeasible {
                // Nothing cheaper than the incumbent survives.
                let (sol, ub) = pre.incumbent.expect("fixing ran with an incumbent");
                report.objective = Some(ub);
                report.solution = Some(sol);
                report.reduced_time = Some(Duration::ZERO);
                report.total_time = start.elapsed();
                return report;
            }
            (model, pre.incumbent.map(|(s, _)| s))
        }
    };
    let t = Instant::now();
    let bnb_cfg = BnbConfig {
        incumbent: seed,
        ..cfg.bnb.clone()
    };
    let res = branch_and_bound(inst, &model, backend, &bnb_cfg);
    report.reduced_time = Some(t.elapsed());
    report.status = status_of(&res.status);
    report.gap = res.gap();
    report.objective = res.objective;
    report.solution = res.solution;
    report.nodes = res.nodes;
    report.total_time = start.elapsed();
    report
}

/// Tier of the big-M a framework ends up using, for reports.
pub fn bigm_tier<S: Scalar>(report: &SolveReport<S>) -> BigMTier {
    if report.rcf.is_some() {
        BigMTier::DoublePrime
    } else {
        BigMTier::Base
    }
}
