//! Scenario files, weighted-bound verification and reports.
//!
//! A scenario names a space, a matrix weight, an operator and exponents.
//! The pipeline computes the instance constants, optionally runs the sparse
//! decomposition and then measures each requested inequality as a ratio of
//! its two sides. Campaigns repeat a scenario over consecutive seeds.

pub mod campaign;
pub mod run;
pub mod scenario;
pub mod verify;

pub use campaign::{campaign_scenarios, demo_scenario};
pub use run::{parallel_map, run_instance, run_scenario, run_scenarios, write_csv, write_outputs, Certificate, DecompositionSummary, InstanceConstants, InstanceOutcome, Pipeline, RunFlags, RunSummary, CSV_COLUMNS};
pub use scenario::{build, build_operator, build_space, build_weight, fingerprint, load_scenarios, parse_scenarios, Built, Check, Generator, MetricSpec, OperatorSpec, PointSpec, Route, Scenario, SpaceSpec, WeightSpec};
pub use verify::{fit_slope, ladder_weights, lp_norm, verify_a2_scaling, verify_cz_bound, verify_endpoint, verify_maximal_bound, weighted_operator_norm, A2Scaling, BoundReport, Context, LadderPoint, A2_SLOPE_BOUND};
