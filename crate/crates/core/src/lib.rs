//! Estimation of the algorithmic variance of randomized voting ensembles.
//!
//! When a randomized ensemble method (bagging, random forests) is re-run on the
//! same training data, its prediction error fluctuates from run to run. This
//! crate estimates the standard deviation of those fluctuations from a *single*
//! trained ensemble, by bootstrapping the rows of its prediction array, and
//! extrapolates the estimate to larger ensemble sizes so that a minimal
//! ensemble size for a target tolerance can be chosen ahead of time.
//!
//! The crate is organized as:
//!
//! - [`ensemble`]: label arrays, plurality voting with tie-as-error semantics,
//!   and hold-out / out-of-bag / class-wise error rates.
//! - [`bootstrap`]: row resampling, sigma and quantile estimation, the
//!   `sqrt(t0/t)` extrapolation rule, and stopping criteria.
//! - [`firstorder`]: a simulator for first-order ensemble models, with exact
//!   error computation for two classes, ground-truth sigma curves, and
//!   distributional diagnostics.
//! - [`trainer`]: a minimal bagged CART trainer with out-of-bag bookkeeping
//!   and synthetic data generators, so the full pipeline runs end to end.
//! - [`formats`]: the text file formats shared with the CLI.

pub mod bootstrap;
pub mod ensemble;
pub mod error;
pub mod firstorder;
pub mod formats;
pub mod rng;
pub mod trainer;

pub use ensemble::{Label, OobMask, PredictionArray, TruthLabels, VoteOutcome};
pub use error::CoreError;
