use super::bigm::BigMTable;
use super::model::{Dims, FormulationKind, MilpModel, ModelBuilder, RowTag, Sense, VarRole};
use crate::{Instance, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulationError {
    #[error("big-M table is {got_t}x{got_b}, instance is {want_t}x{want_b}")]
    Dimension {
        got_t: usize,
        got_b: usize,
        want_t: usize,
        want_b: usize,
    },
}

/// Column and row counts of a formulation, in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub x_cols: usize,
    pub z_cols: usize,
    pub w_cols: usize,
    pub sinr_rows: usize,
    pub coverage_rows: usize,
    pub one_server_rows: usize,
    pub one_level_rows: usize,
    pub vub_rows: usize,
    pub wdef_rows: usize,
}

impl ModelShape {
    pub fn of(
        kind: FormulationKind,
        n_testpoints: usize,
        n_transmitters: usize,
        n_levels: usize,
    ) -> Self {
        let pairs = n_testpoints * n_transmitters;
        let reformulated = kind == FormulationKind::Reformulated;
        Self {
            x_cols: pairs,
            z_cols: n_transmitters * n_levels,
            w_cols: if reformulated { pairs } else { 0 },
            sinr_rows: pairs,
            coverage_rows: 1,
            one_server_rows: n_testpoints,
            one_level_rows: n_transmitters,
            vub_rows: pairs,
            wdef_rows: if reformulated { pairs } else { 0 },
        }
    }

    pub fn columns(&self) -> usize {
        self.x_cols + self.z_cols + self.w_cols
    }

    pub fn rows(&self) -> usize {
        self.sinr_rows
            + self.coverage_rows
            + self.one_server_rows
            + self.one_level_rows
            + self.vub_rows
            + self.wdef_rows
    }
}

fn check_dims<S: Scalar>(inst: &Instance<S>, bigm: &BigMTable<S>) -> Result<(), FormulationError> {
    if bigm.matches(inst) {
        Ok(())
    } else {
        Err(FormulationError::Dimension {
            got_t: bigm.n_testpoints(),
            got_b: bigm.n_transmitters(),
            want_t: inst.n_testpoints(),
            want_b: inst.n_transmitters(),
        })
    }
}

/// Adds X (and W) columns in `(t, b)` order and Z columns in `(b, l)` order.
fn columns<S: Scalar>(b: &mut ModelBuilder<S>, inst: &Instance<S>, with_w: bool) {
    let (nt, nb, nl) = (inst.n_testpoints(), inst.n_transmitters(), inst.n_levels());
    for t in 0..nt {
        for tx in 0..nb {
            b.binary(VarRole::X { t, b: tx }, S::zero());
        }
    }
    for tx in 0..nb {
        for l in 0..nl {
            b.binary(VarRole::Z { b: tx, l }, inst.cost(l));
        }
    }
    if with_w {
        for t in 0..nt {
            for tx in 0..nb {
                b.binary(VarRole::W { t, b: tx }, S::zero());
            }
        }
    }
}

/// Z terms of the SINR row of `(t, beta)`:
/// `-a[t][beta] P_l` on the server's levels and `delta a[t][b] P_l` elsewhere.
fn sinr_power_terms<S: Scalar>(
    b: &ModelBuilder<S>,
    inst: &Instance<S>,
    t: usize,
    beta: usize,
) -> Vec<(usize, S)> {
    let delta = inst.threshold();
    let gains = inst.gains_at(t);
    let mut terms = Vec::with_capacity(inst.n_transmitters() * inst.n_levels());
    for tx in 0..inst.n_transmitters() {
        let weight = if tx == beta {
            -gains[tx]
        } else {
            delta * gains[tx]
        };
        for l in 0..inst.n_levels() {
            terms.push((b.col(VarRole::Z { b: tx, l }), weight * inst.power(l)));
        }
    }
    terms
}

/// Coverage, one-server, one-level and variable-upper-bound rows.
fn common_rows<S: Scalar>(b: &mut ModelBuilder<S>, inst: &Instance<S>) {
    let (nt, nb, nl) = (inst.n_testpoints(), inst.n_transmitters(), inst.n_levels());
    let all_x: Vec<_> = (0..nt)
        .flat_map(|t| (0..nb).map(move |tx| VarRole::X { t, b: tx }))
        .map(|r| (b.col(r), S::one()))
        .collect();
    b.row(
        RowTag::Coverage,
        Sense::Ge,
        S::lit(inst.coverage() as f64),
        all_x,
    );
    for t in 0..nt {
        let terms: Vec<_> = (0..nb)
            .map(|tx| (b.col(VarRole::X { t, b: tx }), S::one()))
            .collect();
        b.row(RowTag::OneServer { t }, Sense::Le, S::one(), terms);
    }
    for tx in 0..nb {
        let terms: Vec<_> = (0..nl)
            .map(|l| (b.col(VarRole::Z { b: tx, l }), S::one()))
            .collect();
        b.row(RowTag::OneLevel { b: tx }, Sense::Le, S::one(), terms);
    }
    for t in 0..nt {
        for tx in 0..nb {
            let mut terms = vec![(b.col(VarRole::X { t, b: tx }), S::one())];
            terms.extend((0..nl).map(|l| (b.col(VarRole::Z { b: tx, l }), -S::one())));
            b.row(RowTag::Vub { t, b: tx }, Sense::Le, S::zero(), terms);
        }
    }
}

fn dims<S: Scalar>(inst: &Instance<S>) -> Dims {
    Dims {
        n_testpoints: inst.n_testpoints(),
        n_transmitters: inst.n_transmitters(),
        n_levels: inst.n_levels(),
    }
}

/// Natural big-M model. Each SINR row is stored as
/// `-a[t][beta] sum_l P_l z[beta][l] + delta sum_{b != beta} a[t][b] sum_l P_l z[b][l] + M x[t][beta] <= M - delta mu`.
pub fn build_natural<S: Scalar>(
    inst: &Instance<S>,
    bigm: &BigMTable<S>,
) -> Result<MilpModel<S>, FormulationError> {
    check_dims(inst, bigm)?;
    let mut b = ModelBuilder::new(FormulationKind::Natural, dims(inst));
    columns(&mut b, inst, false);
    let floor = inst.threshold() * inst.noise();
    for t in 0..inst.n_testpoints() {
        for beta in 0..inst.n_transmitters() {
            let m = bigm.get(t, beta);
            let mut terms = vec![(b.col(VarRole::X { t, b: beta }), m)];
            terms.extend(sinr_power_terms(&b, inst, t, beta));
            b.row(RowTag::Sinr { t, b: beta }, Sense::Le, m - floor, terms);
        }
    }
    common_rows(&mut b, inst);
    Ok(b.finish())
}

/// Reformulated model: SINR rows on the slack,
/// `delta sum_{b != beta} a[t][b] sum_l P_l z[b][l] - a[t][beta] sum_l P_l z[beta][l] - M w[t][beta] <= -delta mu`,
/// plus `w[t][b] + x[t][b] <= 1`.
pub fn build_reformulated<S: Scalar>(
    inst: &Instance<S>,
    bigm: &BigMTable<S>,
) -> Result<MilpModel<S>, FormulationError> {
    check_dims(inst, bigm)?;
    let mut b = ModelBuilder::new(FormulationKind::Reformulated, dims(inst));
    columns(&mut b, inst, true);
    let floor = inst.threshold() * inst.noise();
    for t in 0..inst.n_testpoints() {
        for beta in 0..inst.n_transmitters() {
            let mut terms = sinr_power_terms(&b, inst, t, beta);
            terms.push((b.col(VarRole::W { t, b: beta }), -bigm.get(t, beta)));
            b.row(RowTag::Sinr { t, b: beta }, Sense::Le, -floor, terms);
        }
    }
    common_rows(&mut b, inst);
    for t in 0..inst.n_testpoints() {
        for tx in 0..inst.n_transmitters() {
            let terms = [
                (b.col(VarRole::W { t, b: tx }), S::one()),
                (b.col(VarRole::X { t, b: tx }), S::one()),
            ];
            b.row(RowTag::WDef { t, b: tx }, Sense::Le, S::one(), terms);
        }
    }
    Ok(b.finish())
}

pub fn build<S: Scalar>(
    kind: FormulationKind,
    inst: &Instance<S>,
    bigm: &BigMTable<S>,
) -> Result<MilpModel<S>, FormulationError> {
    match kind {
        FormulationKind::Natural => build_natural(inst, bigm),
        FormulationKind::Reformulated => build_reformulated(inst, bigm),
    }
}
