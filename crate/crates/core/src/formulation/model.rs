use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::{Scalar, Solution};

/// Kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    X,
    Z,
    W,
}

/// What a column stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRole {
    /// Testpoint `t` served by transmitter `b`.
    X { t: usize, b: usize },
    /// Transmitter `b` emitting at level `l`.
    Z { b: usize, l: usize },
    /// Slack of the SINR row of pair `(t, b)`.
    W { t: usize, b: usize },
}

impl VarRole {
    pub fn kind(&self) -> VarKind {
        match self {
            VarRole::X { .. } => VarKind::X,
            VarRole::Z { .. } => VarKind::Z,
            VarRole::W { .. } => VarKind::W,
        }
    }
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::X { t, b } => write!(f, "X_{}_{}", t, b),
            VarRole::Z { b, l } => write!(f, "Z_{}_{}", b, l),
            VarRole::W { t, b } => write!(f, "W_{}_{}", t, b),
        }
    }
}

/// Branching priority classes; a higher class is branched on first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PriorityScheme {
    #[default]
    Uniform,
    /// X before W and Z.
    PreferX,
    /// W before X before Z.
    PreferW,
}

impl PriorityScheme {
    pub fn class(&self, kind: VarKind) -> i32 {
        match (self, kind) {
            (PriorityScheme::Uniform, _) => 0,
            (PriorityScheme::PreferX, VarKind::X) => 1,
            (PriorityScheme::PreferX, _) => 0,
            (PriorityScheme::PreferW, VarKind::W) => 2,
            (PriorityScheme::PreferW, VarKind::X) => 1,
            (PriorityScheme::PreferW, VarKind::Z) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column<S> {
    pub role: VarRole,
    pub lower: S,
    pub upper: S,
    pub cost: S,
    pub integer: bool,
    pub priority: i32,
}

/// A column eliminated from a restricted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedColumn<S> {
    pub role: VarRole,
    pub value: S,
    pub cost: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// Constraint family and indices of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    Sinr { t: usize, b: usize },
    Coverage,
    OneServer { t: usize },
    OneLevel { b: usize },
    Vub { t: usize, b: usize },
    WDef { t: usize, b: usize },
}

impl RowTag {
    /// Short row name, kept within eight characters for small models.
    pub fn name(&self) -> String {
        match self {
            RowTag::Sinr { t, b } => format!("S_{}_{}", t, b),
            RowTag::Coverage => "COVER".to_string(),
            RowTag::OneServer { t } => format!("A_{}", t),
            RowTag::OneLevel { b } => format!("L_{}", b),
            RowTag::Vub { t, b } => format!("V_{}_{}", t, b),
            RowTag::WDef { t, b } => format!("D_{}_{}", t, b),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            RowTag::Sinr { .. } => "SINR",
            RowTag::Coverage => "COVERAGE",
            RowTag::OneServer { .. } => "ONE_SERVER",
            RowTag::OneLevel { .. } => "ONE_LEVEL",
            RowTag::Vub { .. } => "VUB",
            RowTag::WDef { .. } => "W_DEF",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<S> {
    pub tag: RowTag,
    pub sense: Sense,
    pub rhs: S,
    start: usize,
    end: usize,
}

impl<S> Row<S> {
    pub fn len(&self) -> usize {
        self.end - self.start
    }
    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationKind {
    /// Big-M SINR rows on `x`.
    Natural,
    /// SINR rows on the slack `w` with `w + x <= 1`.
    Reformulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n_testpoints: usize,
    pub n_transmitters: usize,
    pub n_levels: usize,
}

/// Solver-agnostic sparse 0-1 minimisation model. Rows are stored compressed;
/// the model is immutable once built.
#[derive(Debug, Clone)]
pub struct MilpModel<S> {
    kind: FormulationKind,
    dims: Dims,
    columns: Vec<Column<S>>,
    rows: Vec<Row<S>>,
    row_cols: Vec<usize>,
    row_vals: Vec<S>,
    index: HashMap<VarRole, usize>,
    /// Columns eliminated by [`MilpModel::restrict`].
    removed: Vec<FixedColumn<S>>,
}

/// Incremental construction of a [`MilpModel`]; the formulation builders use it,
/// and it is public so small hand-written LPs can be posed for testing backends.
pub struct ModelBuilder<S> {
    model: MilpModel<S>,
}

impl<S: Scalar> ModelBuilder<S> {
    pub fn new(kind: FormulationKind, dims: Dims) -> Self {
        Self {
            model: MilpModel {
                kind,
                dims,
                columns: Vec::new(),
                rows: Vec::new(),
                row_cols: Vec::new(),
                row_vals: Vec::new(),
                index: HashMap::new(),
                removed: Vec::new(),
            },
        }
    }

    pub fn binary(&mut self, role: VarRole, cost: S) -> usize {
        self.column(role, S::zero(), S::one(), cost, true)
    }

    pub fn column(&mut self, role: VarRole, lower: S, upper: S, cost: S, integer: bool) -> usize {
        let idx = self.model.columns.len();
        self.model.columns.push(Column {
            role,
            lower,
            upper,
            cost,
            integer,
            priority: 0,
        });
        self.model.index.insert(role, idx);
        idx
    }

    pub fn col(&self, role: VarRole) -> usize {
        self.model.index[&role]
    }

    /// Appends a row; entries must reference distinct columns.
    pub fn row(
        &mut self,
        tag: RowTag,
        sense: Sense,
        rhs: S,
        entries: impl IntoIterator<Item = (usize, S)>,
    ) {
        let start = self.model.row_cols.len();
        for (c, v) in entries {
            self.model.row_cols.push(c);
            self.model.row_vals.push(v);
        }
        let end = self.model.row_cols.len();
        self.model.rows.push(Row {
            tag,
            sense,
            rhs,
            start,
            end,
        });
    }

    pub fn finish(self) -> MilpModel<S> {
        self.model
    }
}

impl<S: Scalar> MilpModel<S> {
    pub fn kind(&self) -> FormulationKind {
        self.kind
    }
    pub fn dims(&self) -> Dims {
        self.dims
    }
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }
    pub fn nonzeros(&self) -> usize {
        self.row_vals.len()
    }
    pub fn columns(&self) -> &[Column<S>] {
        &self.columns
    }
    pub fn column(&self, idx: usize) -> &Column<S> {
        &self.columns[idx]
    }
    pub fn rows(&self) -> &[Row<S>] {
        &self.rows
    }
    pub fn row_entries(&self, row: usize) -> (&[usize], &[S]) {
        let r = &self.rows[row];
        (
            &self.row_cols[r.start..r.end],
            &self.row_vals[r.start..r.end],
        )
    }
    pub fn column_of(&self, role: VarRole) -> Option<usize> {
        self.index.get(&role).copied()
    }
    pub fn removed(&self) -> &[FixedColumn<S>] {
        &self.removed
    }

    /// `(row, column, value)` for every stored coefficient.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        self.rows.iter().enumerate().flat_map(move |(i, r)| {
            (r.start..r.end).map(move |k| (i, self.row_cols[k], self.row_vals[k]))
        })
    }

    pub fn count_rows(&self, family: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.tag.family() == family)
            .count()
    }

    pub fn count_cols(&self, kind: VarKind) -> usize {
        self.columns
            .iter()
            .filter(|c| c.role.kind() == kind)
            .count()
    }

    /// Copy with branching classes assigned from `scheme`.
    pub fn with_priorities(&self, scheme: PriorityScheme) -> Self {
        let mut m = self.clone();
        for c in &mut m.columns {
            c.priority = scheme.class(c.role.kind());
        }
        m
    }

    /// Objective `c . x` including removed fixed columns.
    pub fn objective_value(&self, primal: &[S]) -> S {
        let kept = self
            .columns
            .iter()
            .zip(primal)
            .fold(S::zero(), |acc, (c, v)| acc + c.cost * *v);
        kept + self.removed_cost()
    }

    /// Objective contribution of columns fixed away by [`MilpModel::restrict`].
    pub fn removed_cost(&self) -> S {
        self.removed
            .iter()
            .fold(S::zero(), |acc, f| acc + f.cost * f.value)
    }

    /// Largest row activity violation of `primal`, bounds included.
    pub fn max_violation(&self, primal: &[S]) -> S {
        let mut worst = S::zero();
        for (c, v) in self.columns.iter().zip(primal) {
            worst = worst.max(c.lower - *v).max(*v - c.upper);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let (cols, vals) = self.row_entries(i);
            let act: S = cols.iter().zip(vals).map(|(c, a)| *a * primal[*c]).sum();
            let viol = match r.sense {
                Sense::Le => act - r.rhs,
                Sense::Ge => r.rhs - act,
                Sense::Eq => (act - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn is_integral(&self, primal: &[S], tol: S) -> bool {
        self.columns
            .iter()
            .zip(primal)
            .all(|(c, v)| !c.integer || (*v - v.round()).abs() <= tol)
    }

    /// Reads a 0-1 point back into a [`Solution`]; values above one half count as set.
    pub fn decode(&self, primal: &[S]) -> Solution {
        let Dims {
            n_testpoints: nt,
            n_transmitters: nb,
            ..
        } = self.dims;
        let half = S::lit(0.5);
        let mut server: Vec<Option<(usize, S)>> = vec![None; nt];
        let mut level: Vec<Option<(usize, S)>> = vec![None; nb];
        let mut slack = vec![true; nt * nb];
        let entries = self
            .columns
            .iter()
            .zip(primal.iter().copied())
            .map(|(c, v)| (c.role, v))
            .chain(self.removed.iter().map(|f| (f.role, f.value)));
        for (role, v) in entries {
            match role {
                VarRole::X { t, b } if v > half => {
                    if server[t].is_none_or(|(_, w)| v > w) {
                        server[t] = Some((b, v));
                    }
                }
                VarRole::Z { b, l } if v > half => {
                    if level[b].is_none_or(|(_, w)| v > w) {
                        level[b] = Some((l, v));
                    }
                }
                VarRole::W { t, b } => slack[t * nb + b] = v > half,
                _ => {}
            }
        }
        let sol = Solution::new(
            server.into_iter().map(|s| s.map(|(b, _)| b)).collect(),
            level.into_iter().map(|s| s.map(|(l, _)| l)).collect(),
        );
        match self.kind {
            FormulationKind::Natural => sol,
            FormulationKind::Reformulated => sol.with_slack(slack),
        }
    }

    /// 0-1 column vector of a solution. Slack defaults to `1 - x` when absent.
    pub fn encode(&self, solution: &Solution) -> Vec<S> {
        let nb = self.dims.n_transmitters;
        self.columns
            .iter()
            .map(|c| {
                let set = match c.role {
                    VarRole::X { t, b } => solution.server()[t] == Some(b),
                    VarRole::Z { b, l } => solution.level()[b] == Some(l),
                    VarRole::W { t, b } => match solution.slack() {
                        Some(s) => s[t * nb + b],
                        None => solution.server()[t] != Some(b),
                    },
                };
                if set {
                    S::one()
                } else {
                    S::zero()
                }
            })
            .collect()
    }

    /// Model with the given columns fixed and eliminated. Their contribution is
    /// moved into the right-hand sides; rows left without entries are dropped
    /// when satisfied and kept (empty, hence infeasible) otherwise.
    pub fn restrict(&self, fixings: &BTreeMap<usize, S>) -> Self {
        if fixings.is_empty() {
            return self.clone();
        }
        let mut new_index = vec![usize::MAX; self.columns.len()];
        let mut columns = Vec::with_capacity(self.columns.len() - fixings.len());
        let mut removed = self.removed.clone();
        for (j, c) in self.columns.iter().enumerate() {
            match fixings.get(&j) {
                Some(v) => removed.push(FixedColumn {
                    role: c.role,
                    value: *v,
                    cost: c.cost,
                }),
                None => {
                    new_index[j] = columns.len();
                    columns.push(c.clone());
                }
            }
        }
        let mut b = ModelBuilder::new(self.kind, self.dims);
        b.model.columns = columns;
        b.model.index = b
            .model
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.role, i))
            .collect();
        b.model.removed = removed;
        let tol = S::lp_tolerance();
        for (i, r) in self.rows.iter().enumerate() {
            let (cols, vals) = self.row_entries(i);
            let mut rhs = r.rhs;
            let mut kept = Vec::with_capacity(cols.len());
            for (c, a) in cols.iter().zip(vals) {
                match fixings.get(c) {
                    Some(v) => rhs -= *a * *v,
                    None => kept.push((new_index[*c], *a)),
                }
            }
            if kept.is_empty() {
                let satisfied = match r.sense {
                    Sense::Le => S::zero() <= rhs + tol,
                    Sense::Ge => S::zero() >= rhs - tol,
                    Sense::Eq => rhs.abs() <= tol,
                };
                if satisfied {
                    continue;
                }
            }
            b.row(r.tag, r.sense, rhs, kept);
        }
        b.finish()
    }
}
