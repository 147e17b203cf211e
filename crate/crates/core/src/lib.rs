//! Quantum fluctuation algebra of dissipative spin chains.
//!
//! The crate builds the microscopic side (single-site operator algebra,
//! translation-invariant product states, local Lindblad generators and their
//! exact finite-chain evolution) and the mesoscopic side (symplectic form,
//! covariance, quasi-free Gaussian semigroup on Weyl operators), and ships an
//! experiment harness that compares the two as the chain grows.
//!
//! Module map:
//!
//! * [`opcore`]: complex operator algebra, chain operators, exponentials.
//! * [`chainstate`]: product states and their expectations.
//! * [`fluct`]: fluctuation operators, Weyl elements, Gaussian characteristic functions.
//! * [`lindblad`]: local generators, locality extraction, microscopic evolution.
//! * [`meso`]: the emergent Gaussian semigroup and its certificates.
//! * [`harness`]: convergence studies and the bundled scenarios.

pub mod chainstate;
pub mod error;
pub mod fluct;
pub mod harness;
pub mod lindblad;
pub mod meso;
pub mod opcore;
pub mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for single-site and small chain operators.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense real matrix used for the reduced d×d quantities.
pub type RMat = nalgebra::DMatrix<f64>;
/// Real vector indexing Weyl operators.
pub type RVec = nalgebra::DVector<f64>;
