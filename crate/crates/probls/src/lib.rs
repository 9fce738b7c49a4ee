//! Probabilistic line search for stochastic gradient descent.
//!
//! The central piece is a univariate line search that works with *noisy*
//! function values and gradients: it maintains a Gaussian process surrogate
//! of the objective along the search direction (an integrated Wiener process
//! prior, so the posterior mean is a cubic spline), enumerates candidate
//! steps analytically, scores them with expected improvement weighted by the
//! probability that the Wolfe conditions hold, and accepts a step once that
//! probability clears a fixed threshold. Wrapped around it is an SGD driver
//! that estimates gradient noise within each minibatch and propagates the
//! accepted step scale between iterations, which removes the learning-rate
//! parameter from plain SGD.
//!
//! Modules mirror the layers of the algorithm:
//!
//! - [`gp`]: GP surrogate over `(f, f')` with derivative observations.
//! - [`candidates`]: analytic enumeration of posterior-mean minimizers.
//! - [`bvn`]: normal CDF and bivariate normal rectangle probabilities.
//! - [`wolfe`]: probabilistic (weak and approximate strong) Wolfe belief.
//! - [`acquisition`]: expected improvement times Wolfe probability.
//! - [`controller`]: one line search end to end, in a standardized frame.
//! - [`driver`]: the outer SGD loop with in-batch noise estimation.
//! - [`objectives`] / [`dataset`]: desk-scale test problems and CSV data.

pub mod acquisition;
pub mod bvn;
pub mod candidates;
pub mod controller;
pub mod dataset;
pub mod driver;
pub mod gp;
pub mod objectives;
pub mod wolfe;

mod linalg;
mod util;

pub use controller::{SearchConfig, SearchOutcome, SearchState};
pub use driver::{run, DriverConfig, Mode, RunResult, RunTrace};
pub use gp::{KernelParams, Observation, SurrogatePosterior};
pub use wolfe::WolfeParams;
