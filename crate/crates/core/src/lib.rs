//! Site and power assignment for wireless networks.
//!
//! A testpoint is served when the power received from its server exceeds
//! `delta` times the noise plus the power received from every other active
//! transmitter. The crate builds the natural big-M 0-1 model and its slack
//! reformulation, tightens both with reduced cost fixing, and solves them with
//! a small branch-and-bound over a pluggable LP backend. A brute-force oracle
//! decides small instances exactly.

mod scalar;

pub mod bnb;
pub mod feasibility;
pub mod formulation;
pub mod framework;
pub mod heuristic;
pub mod instance;
pub mod instgen;
pub mod io;
pub mod lp;
pub mod oracle;
pub mod presolve;

pub use feasibility::{
    activation_cost, best_server, best_servers, complete_activation, interference, is_served,
    objective, sinr, sinr_margin, verify_solution, FeasibilityReport, SinrError, Violation,
};
pub use instance::{
    Activation, IndexError, Instance, InstanceError, InstanceField, InstanceSpec, Solution,
};
pub use scalar::Scalar;

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
