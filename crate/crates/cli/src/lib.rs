//! Command-line front end of the `gnpr` library.
//!
//! The binary is a thin wrapper over [`commands::run`]; the experiment
//! runners in [`experiments`] are usable directly from Rust.

pub mod commands;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod method;

pub use error::{CliError, Result};
