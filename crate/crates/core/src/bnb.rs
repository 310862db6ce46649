//! LP-based branch-and-bound over a [`MilpModel`].
//!
//! Nodes are bound-override sets. A node's LP is solved when the node is
//! popped, so children inherit the parent's bound until then. Branching picks
//! the fractional column of highest priority class, most fractional within the
//! class, lowest index on ties; the two children fix it to 0 and 1.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::feasibility::{complete_activation, objective, verify_solution};
use crate::formulation::{extend_solution, FormulationKind, MilpModel, VarKind};
use crate::lp::{BoundOverrides, LpBackend, LpStatus};
use crate::{Instance, Scalar, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeSelection {
    #[default]
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone)]
pub struct BnbConfig<S> {
    pub node_selection: NodeSelection,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub integrality_tol: S,
    /// Absolute optimality gap at which a node is pruned.
    pub gap_tol: S,
    /// Known feasible solution used as the initial cutoff.
    pub incumbent: Option<Solution>,
    /// Keep one [`NodeRecord`] per evaluated node.
    pub record_trace: bool,
}

impl<S: Scalar> Default for BnbConfig<S> {
    fn default() -> Self {
        Self {
            node_selection: NodeSelection::BestBound,
            node_limit: None,
            time_limit: None,
            integrality_tol: S::lit(1e-6),
            gap_tol: S::lit(1e-9),
            incumbent: None,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BnbStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
    /// The LP backend failed; the message comes from its diagnostics.
    Failed(String),
}

impl fmt::Display for BnbStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BnbStatus::Optimal => f.write_str("optimal"),
            BnbStatus::Infeasible => f.write_str("infeasible"),
            BnbStatus::NodeLimit => f.write_str("node limit"),
            BnbStatus::TimeLimit => f.write_str("time limit"),
            BnbStatus::Failed(msg) => write!(f, "backend failure: {}", msg),
        }
    }
}

/// Bound information of one evaluated node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord<S> {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Bound inherited from the parent (`-inf` at the root).
    pub parent_bound: S,
    /// LP bound of the node, `None` when its LP was infeasible.
    pub bound: Option<S>,
    pub branched_on: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct BnbOutcome<S> {
    pub status: BnbStatus,
    pub solution: Option<Solution>,
    pub objective: Option<S>,
    /// Lower bound on the optimum over the unexplored part of the tree.
    pub best_bound: S,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub root_bound: Option<S>,
    pub trace: Vec<NodeRecord<S>>,
}

impl<S: Scalar> BnbOutcome<S> {
    pub fn proven(&self) -> bool {
        self.status == BnbStatus::Optimal
    }

    /// `objective - best_bound`, zero when proven, infinite without incumbent.
    pub fn gap(&self) -> S {
        match (self.status == BnbStatus::Optimal, self.objective) {
            (true, _) => S::zero(),
            (false, Some(obj)) => (obj - self.best_bound).max(S::zero()),
            (false, None) => S::infinity(),
        }
    }
}

struct Node<S> {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    bound: S,
    fixings: Vec<(usize, bool)>,
    order: BestFirst,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BestFirst {
    Bound,
    Depth,
}

impl<S: Scalar> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Node<S> {}
impl<S: Scalar> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Node<S> {
    /// Max-heap order: the node to explore next is the greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        let by_bound = other
            .bound
            .partial_cmp(&self.bound)
            .unwrap_or(Ordering::Equal);
        let by_depth = self.depth.cmp(&other.depth);
        let by_id = self.id.cmp(&other.id);
        match self.order {
            BestFirst::Bound => by_bound.then(by_depth).then(by_id),
            BestFirst::Depth => by_depth.then(by_id),
        }
    }
}

/// Column to branch on: highest priority class, then closest to 0.5, then lowest index.
pub fn select_branching_column<S: Scalar>(
    model: &MilpModel<S>,
    primal: &[S],
    tol: S,
) -> Option<usize> {
    let half = S::lit(0.5);
    let mut best: Option<(usize, i32, S)> = None;
    for (j, col) in model.columns().iter().enumerate() {
        if !col.integer {
            continue;
        }
        let v = primal[j];
        if (v - v.round()).abs() <= tol {
            continue;
        }
        let dist = (v - half).abs();
        let better = match best {
            None => true,
            Some((_, p, d)) => col.priority > p || (col.priority == p && dist < d),
        };
        if better {
            best = Some((j, col.priority, dist));
        }
    }
    best.map(|(j, _, _)| j)
}

fn costs_integral<S: Scalar>(model: &MilpModel<S>) -> bool {
    let integral = |c: S| c == c.round();
    model
        .columns()
        .iter()
        .all(|c| integral(c.cost) || (c.lower == c.upper && integral(c.cost * c.lower)))
        && integral(model.removed_cost())
}

/// Turns an integral LP point into a verified instance solution. Falls back to
/// serving every testpoint its best server under the decoded activation.
fn accept<S: Scalar>(
    inst: &Instance<S>,
    model: &MilpModel<S>,
    primal: &[S],
) -> Option<(Solution, S)> {
    let sol = model.decode(primal);
    if verify_solution(inst, &sol).is_feasible() {
        return Some((sol.clone(), objective(inst, &sol)));
    }
    let mut done = complete_activation(inst, sol.level())?;
    if model.kind() == FormulationKind::Reformulated {
        done = extend_solution(&done);
    }
    verify_solution(inst, &done)
        .is_feasible()
        .then(|| (done.clone(), objective(inst, &done)))
}

pub fn branch_and_bound<S: Scalar>(
    inst: &Instance<S>,
    model: &MilpModel<S>,
    backend: &dyn LpBackend<S>,
    cfg: &BnbConfig<S>,
) -> BnbOutcome<S> {
    let start = Instant::now();
    let mut session = backend.open(model);
    let offset = model.removed_cost();
    let integral_costs = costs_integral(model);
    let order = match cfg.node_selection {
        NodeSelection::BestBound => BestFirst::Bound,
        NodeSelection::DepthFirst => BestFirst::Depth,
    };

    let mut incumbent: Option<(Solution, S)> = cfg.incumbent.as_ref().and_then(|s| {
        let mut s = s.clone();
        if model.kind() == FormulationKind::Reformulated && s.slack().is_none() {
            s = extend_solution(&s);
        }
        verify_solution(inst, &s).is_feasible().then(|| {
            let c = objective(inst, &s);
            (s, c)
        })
    });
    // A node whose bound reaches this value cannot improve the incumbent.
    let cutoff = |inc: &Option<(Solution, S)>, bound: S| -> bool {
        let Some((_, best)) = inc else { return false };
        let b = if integral_costs {
            (bound - cfg.integrality_tol).ceil()
        } else {
            bound
        };
        b >= *best - cfg.gap_tol
    };

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        parent: None,
        depth: 0,
        bound: S::neg_infinity(),
        fixings: Vec::new(),
        order,
    });
    let mut next_id = 1;
    let mut nodes = 0;
    let mut lp_iterations = 0;
    let mut root_bound = None;
    let mut trace = Vec::new();
    let mut status = BnbStatus::Optimal;

    while let Some(node) = heap.pop() {
        if cutoff(&incumbent, node.bound) {
            continue;
        }
        if cfg.node_limit.is_some_and(|l| nodes >= l) {
            status = BnbStatus::NodeLimit;
            heap.push(node);
            break;
        }
        if cfg.time_limit.is_some_and(|l| start.elapsed() >= l) {
            status = BnbStatus::TimeLimit;
            heap.push(node);
            break;
        }
        nodes += 1;
        let overrides: BoundOverrides<S> = node
            .fixings
            .iter()
            .map(|&(j, up)| {
                let v = if up { S::one() } else { S::zero() };
                (j, (v, v))
            })
            .collect();
        let lp = session.solve(&overrides);
        lp_iterations += lp.iterations;
        let mut record = NodeRecord {
            id: node.id,
            parent: node.parent,
            depth: node.depth,
            parent_bound: node.bound,
            bound: None,
            branched_on: None,
        };
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                if cfg.record_trace {
                    trace.push(record);
                }
                continue;
            }
            LpStatus::Unbounded => {
                status = BnbStatus::Failed("unbounded relaxation of a 0-1 model".into());
                break;
            }
            LpStatus::Limit => {
                status = BnbStatus::Failed(lp.diagnostics.unwrap_or_else(|| "LP limit".into()));
                heap.push(node);
                break;
            }
        }
        let bound = lp.objective + offset;
        record.bound = Some(bound);
        if node.id == 0 {
            root_bound = Some(bound);
        }
        if cutoff(&incumbent, bound) {
            if cfg.record_trace {
                trace.push(record);
            }
            continue;
        }
        match select_branching_column(model, &lp.primal, cfg.integrality_tol) {
            None => {
                if let Some((sol, cost)) = accept(inst, model, &lp.primal) {
                    if incumbent.as_ref().is_none_or(|(_, c)| cost < *c) {
                        incumbent = Some((sol, cost));
                    }
                }
            }
            Some(j) => {
                record.branched_on = Some(j);
                let up_first = lp.primal[j] >= S::lit(0.5);
                for up in [!up_first, up_first] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, up));
                    heap.push(Node {
                        id: next_id,
                        parent: Some(node.id),
                        depth: node.depth + 1,
                        bound,
                        fixings,
                        order,
                    });
                    next_id += 1;
                }
            }
        }
        if cfg.record_trace {
            trace.push(record);
        }
    }

    let open_bound = heap
        .iter()
        .filter(|n| !cutoff(&incumbent, n.bound))
        .map(|n| n.bound)
        .fold(S::infinity(), S::min);
    let best_bound = match (&status, &incumbent) {
        (BnbStatus::Optimal, Some((_, c))) => *c,
        (BnbStatus::Optimal, None) => S::infinity(),
        (_, Some((_, c))) => open_bound.min(*c),
        (_, None) => open_bound,
    };
    if status == BnbStatus::Optimal && incumbent.is_none() {
        status = BnbStatus::Infeasible;
    }
    BnbOutcome {
        status,
        objective: incumbent.as_ref().map(|(_, c)| *c),
        solution: incumbent.map(|(s, _)| s),
        best_bound,
        nodes,
        lp_iterations,
        root_bound,
        trace,
    }
}

/// Number of fractional columns of each kind, for diagnostics.
pub fn fractional_counts<S: Scalar>(model: &MilpModel<S>, primal: &[S], tol: S) -> [usize; 3] {
    let mut out = [0; 3];
    for (col, v) in model.columns().iter().zip(primal) {
        if (*v - v.round()).abs() > tol {
            let k = match col.role.kind() {
                VarKind::X => 0,
                VarKind::Z => 1,
                VarKind::W => 2,
            };
            out[k] += 1;
        }
    }
    out
}
