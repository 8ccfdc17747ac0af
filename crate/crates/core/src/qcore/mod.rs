//! The quantum query model: queries, algorithms with measurements and
//! their output distributions, amplitude-estimation outcome laws, and the
//! estimator combinators (boosting, linear composition) used downstream.

pub mod ae;
pub mod algorithm;
pub mod distribution;
pub mod estimator;
pub mod query;
pub mod statevector;

pub use ae::{ae_bits_for_budget, ae_outcome_distribution, ae_phase_distribution, ae_queries, AeLaw};
pub use algorithm::{run_algorithm, AlgorithmSpec, Backend, Stage, Start};
pub use distribution::{ErrorReport, OutputDistribution};
pub use estimator::{boost_median, compose_linear, median_failure, repeats_for_parts, AeComponent, Boosted, Constant, Draw, MeanEstimator, AE_FAILURE};
pub use query::{apply_query_unitary, InfoOracle, Quantizer, QuerySpec};

/// Default qubit cap of the state-vector backend.
pub const DEFAULT_QUBIT_CAP: usize = 24;
