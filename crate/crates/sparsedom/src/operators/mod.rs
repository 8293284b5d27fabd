//! Operators on finite spaces: Haar systems and multipliers, kernel
//! operators, maximal functions, Hörmander constants and the testing
//! condition.

pub mod haar;
pub mod hormander;
pub mod kernel;
pub mod maximal;
pub mod testing;

pub use haar::{build_haar_system, eta_regularity_check, haar_multiplier, haar_multiplier_vec, kernel_from_haar, EtaSymbol, HaarFunction, HaarKernel, HaarSystem};
pub use hormander::hormander_constants;
pub use kernel::{cancellation_tail_check, measured_weak_11, weak_l1_norm, KernelOperator};
pub use maximal::{christ_goldberg_maximal, christ_goldberg_dyadic, dyadic_maximal, maximal, maximal_r, sharp_grand_maximal, sharp_grand_maximal_with};
pub use testing::{t1_testing_condition, testing_search_on, TestingReport};
