//! LP-rounding upper bound: solve the relaxation, switch off the power levels
//! the LP barely uses, propagate, and solve what is left exactly.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::bnb::{branch_and_bound, BnbConfig, BnbStatus};
use crate::feasibility::{complete_activation, objective, verify_solution};
use crate::formulation::{MilpModel, VarRole};
use crate::lp::{BoundOverrides, LpBackend, LpResult, LpStatus};
use crate::presolve::propagate_fixings;
use crate::{Instance, Scalar, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicConfig {
    /// Level variables with LP value strictly below this are fixed to zero.
    pub zero_threshold: f64,
    pub sub_mip_node_limit: Option<usize>,
    pub sub_mip_time_limit: Option<Duration>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            zero_threshold: 1e-4,
            sub_mip_node_limit: Some(20_000),
            sub_mip_time_limit: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("zero_threshold must lie in [0, 0.5), got {0}")]
    Threshold(f64),
    #[error("LP relaxation infeasible: the instance is infeasible")]
    InstanceInfeasible,
    #[error("LP backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone)]
pub struct HeuristicOutcome<S> {
    /// Verified solution, `None` when the reduced problem yielded nothing.
    pub solution: Option<Solution>,
    pub ub: Option<S>,
    pub fixed_levels: BTreeSet<(usize, usize)>,
    pub fixed_assignments: usize,
    /// Propagation alone showed the reduced problem infeasible.
    pub reduced_infeasible: bool,
    pub sub_status: Option<BnbStatus>,
    pub sub_nodes: usize,
    pub elapsed: Duration,
}

/// Runs all four steps, starting with the LP relaxation of `model`.
pub fn fixing_heuristic<S: Scalar>(
    inst: &Instance<S>,
    model: &MilpModel<S>,
    backend: &dyn LpBackend<S>,
    cfg: &HeuristicConfig,
) -> Result<HeuristicOutcome<S>, HeuristicError> {
    let start = Instant::now();
    let lp = backend.open(model).solve(&BoundOverrides::new());
    let mut out = fixing_heuristic_from_lp(inst, model, backend, cfg, &lp)?;
    out.elapsed = start.elapsed();
    Ok(out)
}

/// Steps two to four, reusing an LP relaxation already solved by the caller.
pub fn fixing_heuristic_from_lp<S: Scalar>(
    inst: &Instance<S>,
    model: &MilpModel<S>,
    backend: &dyn LpBackend<S>,
    cfg: &HeuristicConfig,
    lp: &LpResult<S>,
) -> Result<HeuristicOutcome<S>, HeuristicError> {
    if !(0.0..0.5).contains(&cfg.zero_threshold) {
        return Err(HeuristicError::Threshold(cfg.zero_threshold));
    }
    let start = Instant::now();
    match lp.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(HeuristicError::InstanceInfeasible),
        other => {
            return Err(HeuristicError::Backend(
                lp.diagnostics.clone().unwrap_or_else(|| other.to_string()),
            ))
        }
    }
    let threshold = S::lit(cfg.zero_threshold);
    let mut fixed_levels = BTreeSet::new();
    for (j, col) in model.columns().iter().enumerate() {
        if let VarRole::Z { b, l } = col.role {
            if lp.primal[j] < threshold {
                fixed_levels.insert((b, l));
            }
        }
    }
    let prop = propagate_fixings(model, &fixed_levels, inst.coverage());
    let mut out = HeuristicOutcome {
        solution: None,
        ub: None,
        fixed_assignments: prop.fixed_x.len(),
        fixed_levels,
        reduced_infeasible: prop.infeasible,
        sub_status: None,
        sub_nodes: 0,
        elapsed: Duration::ZERO,
    };
    if prop.infeasible {
        out.elapsed = start.elapsed();
        return Ok(out);
    }
    let reduced = model.restrict(&prop.fixings);
    let bnb_cfg = BnbConfig {
        node_limit: cfg.sub_mip_node_limit,
        time_limit: cfg.sub_mip_time_limit,
        ..BnbConfig::default()
    };
    let res = branch_and_bound(inst, &reduced, backend, &bnb_cfg);
    out.sub_nodes = res.nodes;
    if let Some(sol) = res.solution {
        debug_assert!(verify_solution(inst, &sol).is_feasible());
        out.ub = Some(objective(inst, &sol));
        out.solution = Some(sol);
    }
    out.sub_status = Some(res.status);
    out.elapsed = start.elapsed();
    Ok(out)
}

/// Every transmitter at its highest level, if that reaches the coverage target,
/// with cost `|B| * c_max`.
pub fn fallback_upper_bound<S: Scalar>(inst: &Instance<S>) -> Option<(Solution, S)> {
    let top = inst.n_levels() - 1;
    let activation = vec![Some(top); inst.n_transmitters()];
    let sol = complete_activation(inst, &activation)?;
    let cost = objective(inst, &sol);
    Some((sol, cost))
}
