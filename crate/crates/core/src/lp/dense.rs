//! Dense bounded-variable dual simplex.
//!
//! Rows are scaled by powers of two so that their largest coefficient has
//! magnitude in `[0.5, 1)`; this changes neither the primal values nor the
//! column reduced costs. Every row gets a slack (`[0, inf)` for `<=`,
//! `(-inf, 0]` for `>=`, fixed at zero for `=`), and the slack basis with each
//! structural column at the bound favoured by its cost is dual feasible as
//! long as structural bounds are finite, so the dual simplex alone solves
//! every model; infinite structural bounds are boxed artificially and an
//! optimum resting on such a box is reported unbounded.
//!
//! The basis inverse is kept explicitly and refactored periodically. Bound
//! changes between solves keep the basis dual feasible, so branch-and-bound
//! children warm start from the parent's basis.

use super::{BoundOverrides, LpBackend, LpResult, LpSession, LpStatus};
use crate::formulation::{MilpModel, Sense};
use crate::Scalar;

const REFACTOR_EVERY: usize = 64;
const STALL_LIMIT: usize = 200;
const ARTIFICIAL_BOX: f64 = 1e12;

/// Reference LP backend; adequate for models with a few hundred rows.
#[derive(Debug, Clone, Default)]
pub struct DenseSimplex {
    /// Per-solve iteration cap; `None` picks one from the model size.
    pub max_iterations: Option<usize>,
}

impl<S: Scalar> LpBackend<S> for DenseSimplex {
    fn name(&self) -> &str {
        "dense"
    }

    fn open<'a>(&self, model: &'a MilpModel<S>) -> Box<dyn LpSession<S> + 'a> {
        Box::new(Session::new(model, self.max_iterations))
    }
}

struct Session<'a, S> {
    model: &'a MilpModel<S>,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<S>,
    rhs: Vec<S>,
    /// Bounds of structurals then slacks; `boxed[j]` marks an artificial bound.
    lower: Vec<S>,
    upper: Vec<S>,
    boxed: Vec<bool>,
    cost: Vec<S>,
    basis: Vec<usize>,
    /// Basis position of a variable, `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    binv: Vec<S>,
    x: Vec<S>,
    d: Vec<S>,
    updates: usize,
    max_iterations: usize,
    tol: S,
}

enum Outcome {
    Optimal,
    Infeasible,
    Limit,
}

impl<'a, S: Scalar> Session<'a, S> {
    fn new(model: &'a MilpModel<S>, max_iterations: Option<usize>) -> Self {
        let (n, m) = (model.n_cols(), model.n_rows());
        let mut scale = vec![S::one(); m];
        for (i, s) in scale.iter_mut().enumerate() {
            let big = model
                .row_entries(i)
                .1
                .iter()
                .fold(S::zero(), |a, v| a.max(v.abs()));
            if big > S::zero() {
                let e = big.log2().floor().to_i32().unwrap_or(0) + 1;
                *s = S::lit(2f64.powi(-e));
            }
        }
        let mut counts = vec![0usize; n + 1];
        for (_, j, _) in model.triplets() {
            counts[j + 1] += 1;
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = model.nonzeros();
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![S::zero(); nnz];
        let mut fill = counts;
        for (i, j, v) in model.triplets() {
            col_row[fill[j]] = i;
            col_val[fill[j]] = v * scale[i];
            fill[j] += 1;
        }
        let rhs = model
            .rows()
            .iter()
            .zip(&scale)
            .map(|(r, s)| r.rhs * *s)
            .collect();

        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for c in model.columns() {
            lower.push(c.lower);
            upper.push(c.upper);
            cost.push(c.cost);
        }
        for r in model.rows() {
            let (lo, up) = match r.sense {
                Sense::Le => (S::zero(), S::infinity()),
                Sense::Ge => (S::neg_infinity(), S::zero()),
                Sense::Eq => (S::zero(), S::zero()),
            };
            lower.push(lo);
            upper.push(up);
            cost.push(S::zero());
        }
        let max_iterations = max_iterations.unwrap_or(20 * (n + m) + 10_000);
        let mut s = Self {
            model,
            n,
            m,
            col_start,
            col_row,
            col_val,
            rhs,
            lower,
            upper,
            boxed: vec![false; n + m],
            cost,
            basis: Vec::new(),
            pos: Vec::new(),
            at_upper: vec![false; n + m],
            binv: Vec::new(),
            x: vec![S::zero(); n + m],
            d: vec![S::zero(); n + m],
            updates: 0,
            max_iterations,
            tol: S::lp_tolerance(),
        };
        s.slack_basis();
        s
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.basis = (n..n + m).collect();
        self.pos = vec![usize::MAX; n + m];
        for (k, &v) in self.basis.iter().enumerate() {
            self.pos[v] = k;
        }
        self.binv = vec![S::zero(); m * m];
        for k in 0..m {
            self.binv[k * m + k] = S::one();
        }
        for j in 0..n {
            self.at_upper[j] = self.cost[j] < S::zero();
        }
        self.updates = 0;
    }

    fn apply_bounds(&mut self, overrides: &BoundOverrides<S>) {
        let big = S::lit(ARTIFICIAL_BOX);
        for (j, c) in self.model.columns().iter().enumerate() {
            let (lo, up) = overrides.get(&j).copied().unwrap_or((c.lower, c.upper));
            self.boxed[j] = lo.is_infinite() || up.is_infinite();
            self.lower[j] = if lo.is_infinite() { -big } else { lo };
            self.upper[j] = if up.is_infinite() { big } else { up };
        }
    }

    /// Scatters column `j` (structural or slack) into a dense vector.
    fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, S)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, S::one());
        }
    }

    /// Inverts the current basis; a singular basis is replaced by the slack basis.
    fn refactor(&mut self) {
        let m = self.m;
        let mut a = vec![S::zero(); m * m];
        for (k, &v) in self.basis.iter().enumerate() {
            self.for_each_in_col(v, |i, val| a[i * m + k] = val);
        }
        let mut inv = vec![S::zero(); m * m];
        for k in 0..m {
            inv[k * m + k] = S::one();
        }
        let tiny = S::epsilon() * S::lit(1e3);
        for c in 0..m {
            let mut piv = c;
            for r in c + 1..m {
                if a[r * m + c].abs() > a[piv * m + c].abs() {
                    piv = r;
                }
            }
            if a[piv * m + c].abs() <= tiny {
                self.slack_basis();
                return;
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let p = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= p;
                inv[c * m + k] /= p;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f == S::zero() {
                    continue;
                }
                for k in 0..m {
                    let (ak, ik) = (a[c * m + k], inv[c * m + k]);
                    a[r * m + k] -= f * ak;
                    inv[r * m + k] -= f * ik;
                }
            }
        }
        // Row k of `inv` now belongs to basis position k.
        self.binv = inv;
        self.updates = 0;
    }

    fn place_nonbasic(&mut self) {
        for j in 0..self.n + self.m {
            if self.pos[j] != usize::MAX {
                continue;
            }
            let (lo, up) = (self.lower[j], self.upper[j]);
            if lo == up {
                self.at_upper[j] = false;
            } else if self.d[j] < -self.tol {
                self.at_upper[j] = true;
            } else if self.d[j] > self.tol {
                self.at_upper[j] = false;
            }
            if self.at_upper[j] && up.is_infinite() {
                self.at_upper[j] = false;
            }
            if !self.at_upper[j] && lo.is_infinite() {
                self.at_upper[j] = true;
            }
            self.x[j] = if self.at_upper[j] { up } else { lo };
        }
    }

    fn compute_primal(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.n + m {
            if self.pos[j] == usize::MAX && self.x[j] != S::zero() {
                let xj = self.x[j];
                self.for_each_in_col(j, |i, v| r[i] -= v * xj);
            }
        }
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            let v: S = row.iter().zip(&r).map(|(a, b)| *a * *b).sum();
            self.x[self.basis[k]] = v;
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![S::zero(); m];
        for k in 0..m {
            let c = self.cost[self.basis[k]];
            if c != S::zero() {
                for i in 0..m {
                    y[i] += c * self.binv[k * m + i];
                }
            }
        }
        for j in 0..self.n + m {
            if self.pos[j] != usize::MAX {
                self.d[j] = S::zero();
                continue;
            }
            let mut dj = self.cost[j];
            self.for_each_in_col(j, |i, v| dj -= y[i] * v);
            self.d[j] = dj;
        }
    }

    fn max_dual_infeasibility(&self) -> S {
        let mut worst = S::zero();
        for j in 0..self.n + self.m {
            if self.pos[j] != usize::MAX || self.lower[j] == self.upper[j] {
                continue;
            }
            let bad = if self.at_upper[j] {
                self.d[j]
            } else {
                -self.d[j]
            };
            worst = worst.max(bad);
        }
        worst
    }

    fn primal_infeasibility(&self, k: usize) -> S {
        let v = self.basis[k];
        let x = self.x[v];
        (self.lower[v] - x).max(x - self.upper[v]).max(S::zero())
    }

    fn choose_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for k in 0..self.m {
            let inf = self.primal_infeasibility(k);
            if inf <= self.tol {
                continue;
            }
            best = match best {
                None => Some((k, inf)),
                Some((bk, binf)) => {
                    let better = if bland {
                        self.basis[k] < self.basis[bk]
                    } else {
                        inf > binf
                    };
                    if better {
                        Some((k, inf))
                    } else {
                        Some((bk, binf))
                    }
                }
            };
        }
        best.map(|(k, _)| k)
    }

    fn dual_simplex(&mut self, iterations: &mut usize) -> Outcome {
        let (n, m) = (self.n, self.m);
        let ptol = self.tol;
        let mut bland = false;
        let mut stall = 0usize;
        let mut retried = false;
        let mut alpha = vec![S::zero(); n + m];
        let mut u = vec![S::zero(); m];
        loop {
            let p = match self.choose_leaving(bland) {
                Some(p) => p,
                None => return Outcome::Optimal,
            };
            if *iterations >= self.max_iterations {
                return Outcome::Limit;
            }
            *iterations += 1;
            let leave = self.basis[p];
            let to_lower = self.x[leave] < self.lower[leave];
            let rho = self.binv[p * m..(p + 1) * m].to_vec();

            // Ratio test over nonbasic columns, Harris style with two passes.
            let mut bound = S::infinity();
            let mut cands: Vec<(usize, S)> = Vec::new();
            for j in 0..n + m {
                if self.pos[j] != usize::MAX || self.lower[j] == self.upper[j] {
                    continue;
                }
                let mut a = S::zero();
                self.for_each_in_col(j, |i, v| a += rho[i] * v);
                alpha[j] = a;
                let eligible = if to_lower {
                    (!self.at_upper[j] && a < -ptol) || (self.at_upper[j] && a > ptol)
                } else {
                    (!self.at_upper[j] && a > ptol) || (self.at_upper[j] && a < -ptol)
                };
                if !eligible {
                    continue;
                }
                let dj = if self.at_upper[j] {
                    (-self.d[j]).max(S::zero())
                } else {
                    self.d[j].max(S::zero())
                };
                if !bland {
                    bound = bound.min((dj + self.tol) / a.abs());
                }
                cands.push((j, dj / a.abs()));
            }
            if cands.is_empty() {
                if self.updates > 0 && !retried {
                    retried = true;
                    self.refresh();
                    continue;
                }
                return Outcome::Infeasible;
            }
            retried = false;
            let q = if bland {
                let mut best = cands[0];
                for &c in &cands[1..] {
                    if c.1 < best.1 || (c.1 == best.1 && c.0 < best.0) {
                        best = c;
                    }
                }
                best.0
            } else {
                let mut best: Option<usize> = None;
                for &(j, r) in &cands {
                    if r <= bound && best.is_none_or(|b| alpha[j].abs() > alpha[b].abs()) {
                        best = Some(j);
                    }
                }
                best.unwrap_or(cands[0].0)
            };

            u.iter_mut().for_each(|v| *v = S::zero());
            {
                let binv = &self.binv;
                let mut col = Vec::new();
                self.for_each_in_col(q, |i, v| col.push((i, v)));
                for k in 0..m {
                    let row = &binv[k * m..(k + 1) * m];
                    u[k] = col.iter().map(|&(i, v)| row[i] * v).sum();
                }
            }
            let aq = alpha[q];
            if (u[p] - aq).abs() > S::lit(1e-6) * (S::one() + aq.abs()) && self.updates > 0 {
                self.refresh();
                continue;
            }

            let target = if to_lower {
                self.lower[leave]
            } else {
                self.upper[leave]
            };
            let theta = (self.x[leave] - target) / u[p];
            for k in 0..m {
                let v = self.basis[k];
                self.x[v] -= theta * u[k];
            }
            self.x[q] += theta;
            self.x[leave] = target;

            let theta_d = self.d[q] / aq;
            for j in 0..n + m {
                if self.pos[j] == usize::MAX && j != q && self.lower[j] != self.upper[j] {
                    self.d[j] -= theta_d * alpha[j];
                }
            }
            self.d[q] = S::zero();
            self.d[leave] = -theta_d;
            self.at_upper[leave] = !to_lower;

            self.basis[p] = q;
            self.pos[q] = p;
            self.pos[leave] = usize::MAX;
            let piv = u[p];
            for i in 0..m {
                self.binv[p * m + i] /= piv;
            }
            for k in 0..m {
                if k == p || u[k] == S::zero() {
                    continue;
                }
                let f = u[k];
                for i in 0..m {
                    let t = self.binv[p * m + i];
                    self.binv[k * m + i] -= f * t;
                }
            }
            self.updates += 1;
            if self.updates >= REFACTOR_EVERY {
                self.refresh();
            }

            if theta_d.abs() <= S::epsilon() {
                stall += 1;
                if stall > STALL_LIMIT {
                    bland = true;
                }
            } else {
                stall = 0;
            }
        }
    }

    /// Refactors and recomputes primal and dual values from scratch.
    fn refresh(&mut self) {
        self.refactor();
        self.compute_duals();
        self.place_nonbasic();
        self.compute_primal();
    }

    fn result(&self, iterations: usize) -> LpResult<S> {
        let n = self.n;
        let mut primal = Vec::with_capacity(n);
        let mut reduced = Vec::with_capacity(n);
        for j in 0..n {
            primal.push(self.x[j].max(self.lower[j]).min(self.upper[j]));
            reduced.push(if self.pos[j] == usize::MAX {
                self.d[j]
            } else {
                S::zero()
            });
        }
        let objective = primal
            .iter()
            .zip(&self.cost)
            .fold(S::zero(), |acc, (x, c)| acc + *x * *c);
        LpResult {
            status: LpStatus::Optimal,
            objective,
            primal,
            reduced_costs: reduced,
            iterations,
            diagnostics: None,
        }
    }
}

impl<S: Scalar> LpSession<S> for Session<'_, S> {
    fn solve(&mut self, overrides: &BoundOverrides<S>) -> LpResult<S> {
        for (&j, &(lo, up)) in overrides {
            if j >= self.n || lo > up {
                let msg = if j >= self.n {
                    "override on unknown column"
                } else {
                    "empty bound interval"
                };
                return if j >= self.n {
                    LpResult::without_solution(LpStatus::Limit, 0, Some(msg.into()))
                } else {
                    LpResult::without_solution(LpStatus::Infeasible, 0, Some(msg.into()))
                };
            }
        }
        self.apply_bounds(overrides);
        self.refresh();
        if self.max_dual_infeasibility() > self.tol * S::lit(100.0) {
            self.slack_basis();
            self.refresh();
        }
        let mut iterations = 0;
        let mut cold = false;
        loop {
            match self.dual_simplex(&mut iterations) {
                Outcome::Limit => {
                    return LpResult::without_solution(
                        LpStatus::Limit,
                        iterations,
                        Some("iteration limit".into()),
                    )
                }
                Outcome::Infeasible => {
                    return LpResult::without_solution(LpStatus::Infeasible, iterations, None)
                }
                Outcome::Optimal => {
                    self.refresh();
                    if self.choose_leaving(false).is_some() {
                        continue;
                    }
                    if self.max_dual_infeasibility() > S::lit(1e-7).max(self.tol * S::lit(100.0))
                        && !cold
                    {
                        cold = true;
                        self.slack_basis();
                        self.refresh();
                        continue;
                    }
                    let unbounded = (0..self.n).any(|j| {
                        self.boxed[j]
                            && self.pos[j] == usize::MAX
                            && self.x[j].abs() >= S::lit(ARTIFICIAL_BOX)
                    });
                    if unbounded {
                        return LpResult::without_solution(LpStatus::Unbounded, iterations, None);
                    }
                    return self.result(iterations);
                }
            }
        }
    }
}
