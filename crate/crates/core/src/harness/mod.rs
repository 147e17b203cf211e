//! Experiment orchestration.
//!
//! Bundled scenarios, certificate checks, the microscopic-versus-mesoscopic
//! convergence study and the auxiliary limit checks. Independent grid points
//! run through [`Execution`](crate::par::Execution); results come back in a
//! fixed order.

mod demo;
mod experiments;
mod model;
mod stats;
mod verify;

pub use demo::{spin1_demo, thermal_characteristic, thermal_cross_check, Comparison, Spin1Report};
pub use experiments::{
    converge_theorem2, eq36_limit, eq36_passed, lemma4_decay, prop1_scaling, ConvergenceRow, Eq36Row,
    ExperimentPlan, Lemma4Report, MicroPath, Prop1Report,
};
pub use model::{Certificates, Certified, Model};
pub use stats::{loglog_slope, monotone_decreasing, strictly_decreasing, CONVERGED_FLOOR};
pub use verify::{run_verification, SuiteResult, VerifyOptions};

/// Default chain lengths for the factorised path.
pub const FACTORIZED_N_LIST: [usize; 7] = [9, 27, 81, 243, 729, 2187, 10_000];
/// Default chain lengths for the dense path.
pub const DENSE_N_LIST: [usize; 3] = [1, 3, 5];
