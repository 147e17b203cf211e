//! Finite-dimensional complex operator algebra.
//!
//! Single-site matrices ([`SiteOperator`]), their embedding into finite
//! chains ([`ChainOperator`], stored as sums of tensor-product terms and
//! densified on demand), commutator machinery, and matrix exponentials
//! (dense Padé and matrix-free Krylov action).

mod basis;
mod chain;
mod expm;
mod site;

pub use basis::MatrixBasis;
pub use chain::{
    chain_sites, commutator, embed, operator_norm, ChainOperator, DenseChainOperator, ProductTerm,
    Site, DEFAULT_DENSE_CAP,
};
pub use expm::{expm, expm_action, expm_real, CVec, KrylovOptions};
pub use site::{
    herm_exp_derivative, hermitian_min_eigenvalue, kron, multicommutator, pauli, spectral_norm,
    spin_matrices, SiteOperator, HERMITICITY_TOL,
};
