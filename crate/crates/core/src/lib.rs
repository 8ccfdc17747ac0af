//! Quantum query algorithms for weighted means, weighted integration,
//! weakly singular integral operators and elliptic boundary value problems,
//! together with classical deterministic and randomized baselines and a
//! benchmark harness that measures query/error convergence rates.
//!
//! The crate is organized bottom-up:
//!
//! * [`qcore`] – the query model: oracles, state-vector execution,
//!   amplitude-estimation outcome laws and estimator combinators.
//! * [`qestimate`] – weighted mean and weighted integration estimators.
//! * [`qsingular`] – multilevel approximation of weakly singular integral
//!   operators.
//! * [`classical`] – piecewise polynomial interpolation and Monte Carlo
//!   baselines.
//! * [`pdelab`] – Poisson problems with closed-form Green's functions.
//! * [`bench`] – experiment configuration, trials, rate fits, CSV and SVG.

pub mod bench;
pub mod classical;
pub mod error;
pub mod pdelab;
pub mod qcore;
pub mod qestimate;
pub mod qsingular;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
