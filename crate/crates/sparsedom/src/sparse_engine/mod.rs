//! Convex-body sparse domination with certificates.
//!
//! [`calibrate_config`] fixes the stopping parameters on an [`Instance`],
//! [`one_step_decompose`] performs one stopping step and
//! [`sparse_dominate`] iterates it down to singletons. Every run certifies
//! sparseness, the kernel mixed norms, the packing of each step and the
//! pointwise identity `Tf = κ Σ_Q avg_{αQ} k_Q(x,·) f χ_Q`.

pub mod config;
pub mod decompose;
pub mod forms;
pub mod multi;
pub mod t1;

pub use config::{calibrate_config, level_envelope, power_tail, CubeData, Instance, LevelSource, StoppingConfig};
pub use decompose::{
    dominate, one_step_decompose, reconstruction_error, sparse_dominate, InfBound, OneStepResult, SparseCube, SparseDecomposition,
    MEMBERSHIP_TOL, MIXED_NORM_TOL, RECONSTRUCTION_TOL, THRESHOLD_TOL,
};
pub use forms::{bilinear_sparse_form, maximal_stopping_family, stopping_children, StoppingFamily, StoppingNode};
pub use multi::{to_multi_system_form, MultiEntry, MultiSystemForm};
pub use t1::{check_t1_hypotheses, t1_sparse, T1Decomposition, T1Hypotheses, T1Limits};

#[cfg(test)]
mod tests;
