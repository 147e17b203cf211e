//! Local Lindblad generators on finite chains.
//!
//! `𝕃_N[X] = i[H_N, X] + 𝔻_N[X]` with `H_N = Σ_k h^{(k)}` and a dissipator
//! built from single-site Kraus operators `v_μ`, a coefficient matrix `D`
//! and a translation-invariant coupling profile `J(k − l)`. The dissipator
//! comes in the standard Lindblad form or as a double commutator.

mod aux;
mod evolve;
mod generator;
mod locality;
mod spec;

pub use aux::{
    generator_action_residual, rn_commutator_norm, rn_operator, rn_statistics, s_operator,
    s_operator_moments, RnStat,
};
pub use evolve::{
    apply_site_propagator, micro_evolve, micro_evolve_factorized, single_site_propagator,
    PropagationOptions,
};
pub use generator::{apply_generator, apply_generator_parts, DenseGenerator, GeneratorParts};
pub use locality::{
    check_locality, invariance_probe, kossakowski_check, KossakowskiReport, ReducedGenerator,
    LOCALITY_TOL,
};
pub use spec::{CouplingProfile, DissipatorForm, LindbladSpec};
