//! LP relaxations behind a small backend contract.
//!
//! A backend opens a session on a model; the session solves the continuous
//! relaxation repeatedly under different column bound overrides, which is all
//! branch-and-bound needs. Sessions may keep state (a basis) between calls.

mod dense;

use std::collections::BTreeMap;
use std::fmt;

pub use dense::DenseSimplex;

use crate::formulation::MilpModel;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or backend failure; see the diagnostics.
    Limit,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::Limit => "limit",
        })
    }
}

/// Outcome of one relaxation solve. `objective` is `c . primal` over the
/// model's own columns; the constant of columns removed by
/// [`MilpModel::restrict`] is not included. Reduced costs follow the
/// minimisation convention (nonnegative at lower bound, nonpositive at upper).
#[derive(Debug, Clone, PartialEq)]
pub struct LpResult<S> {
    pub status: LpStatus,
    pub objective: S,
    pub primal: Vec<S>,
    pub reduced_costs: Vec<S>,
    pub iterations: usize,
    pub diagnostics: Option<String>,
}

impl<S: Scalar> LpResult<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn without_solution(
        status: LpStatus,
        iterations: usize,
        diagnostics: Option<String>,
    ) -> Self {
        Self {
            status,
            objective: S::nan(),
            primal: Vec::new(),
            reduced_costs: Vec::new(),
            iterations,
            diagnostics,
        }
    }
}

/// Column index to temporary `(lower, upper)` bounds.
pub type BoundOverrides<S> = BTreeMap<usize, (S, S)>;

pub trait LpSession<S: Scalar> {
    /// Solves the relaxation with `overrides` replacing the model bounds of the
    /// listed columns; all other columns use the model bounds.
    fn solve(&mut self, overrides: &BoundOverrides<S>) -> LpResult<S>;
}

pub trait LpBackend<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;
    fn open<'a>(&self, model: &'a MilpModel<S>) -> Box<dyn LpSession<S> + 'a>;
}

/// One-shot relaxation solve.
pub fn solve_lp<S: Scalar>(
    backend: &dyn LpBackend<S>,
    model: &MilpModel<S>,
    overrides: &BoundOverrides<S>,
) -> LpResult<S> {
    backend.open(model).solve(overrides)
}

/// Checks an optimal result against the model: primal within bounds and rows
/// up to `tol`, objective consistent. Returns a description of the first problem.
pub fn check_result<S: Scalar>(
    model: &MilpModel<S>,
    overrides: &BoundOverrides<S>,
    res: &LpResult<S>,
    tol: S,
) -> Result<(), String> {
    if res.status != LpStatus::Optimal {
        return Ok(());
    }
    if res.primal.len() != model.n_cols() || res.reduced_costs.len() != model.n_cols() {
        return Err("result length does not match the model".into());
    }
    for (j, col) in model.columns().iter().enumerate() {
        let (lo, up) = overrides.get(&j).copied().unwrap_or((col.lower, col.upper));
        let v = res.primal[j];
        if v < lo - tol || v > up + tol {
            return Err(format!(
                "column {} = {} outside [{}, {}]",
                col.role, v, lo, up
            ));
        }
    }
    let viol = model.max_violation(&res.primal);
    if viol > tol {
        return Err(format!("row violation {}", viol));
    }
    let obj: S = model
        .columns()
        .iter()
        .zip(&res.primal)
        .map(|(c, v)| c.cost * *v)
        .sum();
    if (obj - res.objective).abs() > tol * obj.abs().max(S::one()) {
        return Err(format!("objective {} but c.x = {}", res.objective, obj));
    }
    Ok(())
}
