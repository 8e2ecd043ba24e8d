//! Simulation and drift estimation for the two-factor affine diffusion
//!
//! ```text
//! dY_t = (a - b Y_t) dt + sqrt(Y_t) dL_t
//! dX_t = (m - theta X_t) dt + sqrt(Y_t) dB_t
//! ```
//!
//! with `L`, `B` independent Brownian motions.
//!
//! - [`model`]: parameters, regimes, stationary moments, characteristic function.
//! - [`sim`]: exact and Euler simulation on reproducible random streams.
//! - [`stats`]: the path integrals behind every estimator.
//! - [`estimate`]: maximum likelihood and least squares estimators.
//! - [`asymptotics`]: limiting covariances and long-run moments.
//! - [`experiment`]: Monte Carlo studies with JSON reports.
//!
//! ```
//! use affine2f::estimate::mle_full;
//! use affine2f::model::ModelParams;
//! use affine2f::sim::{simulate_stationary_start, GridSpec, RngStream, Scheme};
//! use affine2f::stats::sufficient_stats;
//!
//! let p = ModelParams::new(1.0, 1.0, 1.0, 1.0)?;
//! let path = simulate_stationary_start(&p, GridSpec::new(100.0, 0.01)?, 10.0, Scheme::Exact, RngStream::new(1, 0))?;
//! let fit = mle_full(&sufficient_stats(&path)?)?;
//! assert!(fit.b_hat > 0.0);
//! # Ok::<(), affine2f::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod model;
pub mod output;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/stationary.md")]
    mod stationary {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/path_functionals.md")]
    mod path_functionals {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
