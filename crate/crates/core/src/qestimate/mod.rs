//! Scalar estimators: plain means, weighted means through integer
//! replication of the weights, and weighted integrals through piecewise
//! constant interpolation on a cell partition.

pub mod integrate;
pub mod mean;
pub mod reduce;

pub use integrate::{
    auto_refinement, partition_cells, power_density_sampler, probe_lipschitz, weighted_integral, weighted_integral_estimator,
    CellPartition, DensityMc, IntegrationProblem,
};
pub use mean::{
    mc_mean, qmean, qmean_estimator, weighted_mean, weighted_mean_complex, weighted_mean_estimator, ComplexEstimator, Estimate,
    LeafBackend,
};
pub use reduce::{reduce_weights, WeightReduction};
