//! LP relaxations solved by HiGHS (dual simplex, single thread, silent).
//!
//! The session keeps one HiGHS model alive and only changes column bounds
//! between solves, so later solves start from the previous basis.

use std::collections::BTreeSet;

use highs::{Col, HighsModelStatus, Model, RowProblem};
use sitepower::formulation::{MilpModel, Sense};
use sitepower::lp::{BoundOverrides, LpBackend, LpResult, LpSession, LpStatus};

/// Feasibility and optimality tolerance handed to HiGHS.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct HighsBackend {
    /// Simplex iteration cap per solve.
    pub iteration_limit: Option<u32>,
}

impl LpBackend<f64> for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn open<'a>(&self, model: &'a MilpModel<f64>) -> Box<dyn LpSession<f64> + 'a> {
        Box::new(HighsSession {
            model,
            iteration_limit: self.iteration_limit,
            highs: None,
            cols: Vec::new(),
            touched: BTreeSet::new(),
        })
    }
}

struct HighsSession<'a> {
    model: &'a MilpModel<f64>,
    iteration_limit: Option<u32>,
    highs: Option<Model>,
    cols: Vec<Col>,
    /// Columns whose bounds currently differ from the model.
    touched: BTreeSet<usize>,
}

impl HighsSession<'_> {
    fn build(&mut self, cold: bool) -> Model {
        let m = self.model;
        let mut pb = RowProblem::default();
        self.cols = m
            .columns()
            .iter()
            .map(|c| pb.add_column(c.cost, c.lower..=c.upper))
            .collect();
        for (i, row) in m.rows().iter().enumerate() {
            let (idx, val) = m.row_entries(i);
            let factors: Vec<(Col, f64)> = idx
                .iter()
                .zip(val)
                .map(|(&j, &v)| (self.cols[j], v))
                .collect();
            match row.sense {
                Sense::Le => pb.add_row(..=row.rhs, factors),
                Sense::Ge => pb.add_row(row.rhs.., factors),
                Sense::Eq => pb.add_row(row.rhs..=row.rhs, factors),
            }
        }
        let mut model = pb.optimise(highs::Sense::Minimise);
        model.make_quiet();
        model.set_option("threads", 1);
        model.set_option("solver", "simplex");
        model.set_option("simplex_strategy", 1);
        model.set_option("presolve", if cold { "on" } else { "off" });
        model.set_option("primal_feasibility_tolerance", TOLERANCE);
        model.set_option("dual_feasibility_tolerance", TOLERANCE);
        if let Some(limit) = self.iteration_limit {
            model.set_option("simplex_iteration_limit", limit as i32);
        }
        model
    }

    /// Without columns every row reads `0 (sense) rhs`.
    fn solve_empty(&self) -> LpResult<f64> {
        let ok = self.model.rows().iter().all(|r| match r.sense {
            Sense::Le => r.rhs >= -TOLERANCE,
            Sense::Ge => r.rhs <= TOLERANCE,
            Sense::Eq => r.rhs.abs() <= TOLERANCE,
        });
        if !ok {
            return LpResult::without_solution(LpStatus::Infeasible, 0, None);
        }
        LpResult {
            status: LpStatus::Optimal,
            objective: 0.0,
            primal: Vec::new(),
            reduced_costs: Vec::new(),
            iterations: 0,
            diagnostics: None,
        }
    }

    fn solve_once(&mut self, overrides: &BoundOverrides<f64>, cold: bool) -> LpResult<f64> {
        let mut highs = match self.highs.take() {
            Some(h) if !cold => h,
            _ => {
                self.touched.clear();
                self.build(cold)
            }
        };
        for &j in &self.touched {
            if !overrides.contains_key(&j) {
                let c = self.model.column(j);
                highs.change_column_bounds(self.cols[j], c.lower..=c.upper);
            }
        }
        self.touched = overrides.keys().copied().collect();
        for (&j, &(lo, up)) in overrides {
            if lo > up {
                self.highs = Some(highs);
                return LpResult::without_solution(
                    LpStatus::Infeasible,
                    0,
                    Some(format!("column {} has empty bounds", j)),
                );
            }
            highs.change_column_bounds(self.cols[j], lo..=up);
        }

        let solved = match highs.try_solve() {
            Ok(s) => s,
            // The handle is gone; the next call rebuilds it.
            Err(e) => {
                return LpResult::without_solution(
                    LpStatus::Limit,
                    0,
                    Some(format!("HiGHS run failed: {:?}", e)),
                )
            }
        };
        let iterations = solved.simplex_iteration_count().max(0) as usize;
        let result = match solved.status() {
            HighsModelStatus::Optimal => {
                let sol = solved.get_solution();
                let primal = sol.columns().to_vec();
                LpResult {
                    status: LpStatus::Optimal,
                    objective: self.model.objective_value(&primal),
                    primal,
                    reduced_costs: sol.dual_columns().to_vec(),
                    iterations,
                    diagnostics: None,
                }
            }
            // Every column posed here is bounded, so "unbounded or infeasible"
            // can only be infeasible.
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                LpResult::without_solution(LpStatus::Infeasible, iterations, None)
            }
            HighsModelStatus::Unbounded => {
                LpResult::without_solution(LpStatus::Unbounded, iterations, None)
            }
            other => LpResult::without_solution(
                LpStatus::Limit,
                iterations,
                Some(format!("HiGHS status {:?}", other)),
            ),
        };
        self.highs = Some(Model::from(solved));
        result
    }
}

impl LpSession<f64> for HighsSession<'_> {
    fn solve(&mut self, overrides: &BoundOverrides<f64>) -> LpResult<f64> {
        if self.model.n_cols() == 0 {
            return self.solve_empty();
        }
        let first = self.solve_once(overrides, false);
        if first.status != LpStatus::Limit || self.iteration_limit.is_some() {
            return first;
        }
        // A warm start occasionally ends without a verdict; retry from scratch
        // with presolve, which also rescales the problem.
        let mut second = self.solve_once(overrides, true);
        second.iterations += first.iterations;
        if second.status == LpStatus::Limit {
            second.diagnostics = Some(format!(
                "{}; cold restart: {}",
                first.diagnostics.unwrap_or_default(),
                second.diagnostics.clone().unwrap_or_default()
            ));
        }
        // Keep later solves on the fast path.
        self.highs = None;
        second
    }
}
