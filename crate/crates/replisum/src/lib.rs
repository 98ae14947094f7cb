//! Assessing replication success by combining the one-sided p-values of an
//! original study and its replication.
//!
//! Five combination methods are covered, each controlling the overall
//! Type-I error rate at α² when success requires a combined p-value at or
//! below α²:
//!
//! * the two-trials rule max{p_o, p_r}²,
//! * the sum of p-values referred to the Irwin-Hall distribution,
//! * a weighted sum referred to its trapezoidal null distribution,
//! * Fisher's product criterion,
//! * fixed-effect meta-analysis (weighted Stouffer).
//!
//! Around the combination methods the crate provides their operating
//! characteristics (conditional Type-I error rates in [`conditional`],
//! project power in [`power`]), replication sample-size calculation under
//! conditional and predictive power ([`design`]), alpha-spending plans for
//! a second replication study ([`sequential`]), batch analysis of
//! replication-project datasets ([`projects`]), and a deterministic Monte
//! Carlo harness that cross-checks every analytic quantity ([`sim`]).
//!
//! The `replisum` binary exposes all of it; `examples/` holds one runnable
//! program per capability.

pub mod cli;
pub mod combine;
pub mod conditional;
pub mod design;
pub mod error;
pub mod power;
pub mod projects;
pub mod sequential;
pub mod sim;
pub mod specfun;

mod quad;

pub use combine::{Method, MethodResult, StudyPair, Weights};
pub use error::{Error, Result};
pub use specfun::Probability;
