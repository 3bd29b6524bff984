//! Command-line front end for the causal differential privacy checkers.
//!
//! The binary is a thin wrapper over [`commands::run`]; everything here is
//! public so the integration tests can drive commands in-process.

pub mod app;
pub mod commands;
pub mod error;
pub mod format;
pub mod report;
pub mod scenarios;
