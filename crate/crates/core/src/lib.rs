//! Exact verification of differential-privacy definitions.
//!
//! Mechanisms are finite kernels from databases to output distributions.
//! Each kernel can be wrapped into a structural equation model
//! `R_i -> D_i -> D -> O`, where associative (conditioning) and causal
//! (intervention) formulations of privacy can be evaluated with exact
//! rational arithmetic and compared against the classic definition.
//!
//! * [`sem`]: finite structural equation models, lifting, conditioning and
//!   intervention.
//! * [`mechanism`]: kernels, the built-in mechanisms and the canonical model.
//! * [`checkers`] and [`falsify`]: the privacy definitions as checks.
//! * [`brp`]: effect sizes between variables and their composition.
//! * [`adversary`]: Bayesian belief updates of an observer.

pub mod adversary;
pub mod brp;
pub mod checkers;
pub mod falsify;
pub mod mechanism;
pub mod random;
pub mod ratio;
pub mod sem;

pub use ratio::{format_rational, parse_rational, rat, RatioBound, Rational};
