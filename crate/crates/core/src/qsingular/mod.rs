//! Multilevel estimation of weakly singular integral operators.

pub mod interp;
pub mod kernel;
pub mod leafquad;
pub mod multilevel;
pub mod plan;
pub mod smooth;
pub mod tables;

pub use interp::DyadicLevel;
pub use kernel::{power_kernel, unit_kernel, Bbox, Euclidean, Geometry, Kernel};
pub use plan::{select_budgets, select_budgets_for_rate, LevelBudget, MultilevelPlan, RateExponents, Regime};
pub use tables::{InputFunction, Potential};
pub use multilevel::{level_norms, multilevel_apply, multilevel_estimator, plan_for, LeafInfo, LeafKind, LevelNorms, MultilevelEstimator, MultilevelOutput, PiecewisePoly};
pub use smooth::{default_cells, slab_decomposition, smooth_apply, smooth_estimator, Slab, SlabDecomposition, SmoothEstimator, SmoothOutput, SmoothPart};
