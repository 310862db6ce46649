//! Natural and reformulated 0-1 models as sparse MILPs.

mod bigm;
mod build;
mod model;
pub mod mps;

pub use bigm::{big_m_base, BigMTable, BigMTier, InterfererSets};
pub use build::{build, build_natural, build_reformulated, FormulationError, ModelShape};
pub use model::{
    Column, Dims, FixedColumn, FormulationKind, MilpModel, ModelBuilder, PriorityScheme, Row,
    RowTag, Sense, VarKind, VarRole,
};

use crate::Solution;

/// Adds the slack table `w = 1 - x` to a natural solution.
pub fn extend_solution(solution: &Solution) -> Solution {
    let nb = solution.n_transmitters();
    let slack = solution
        .server()
        .iter()
        .flat_map(|s| (0..nb).map(move |b| *s != Some(b)))
        .collect();
    solution.clone().with_slack(slack)
}

/// Drops the slack table of a reformulated solution.
pub fn project_solution(solution: &Solution) -> Solution {
    solution.clone().without_slack()
}
