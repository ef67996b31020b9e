//! File formats, parallel execution, the Monte Carlo harness and report
//! types for the `gpgof` command line tool. The statistics themselves live in
//! [`gpgof_core`].

pub mod data;
mod error;
pub mod exec;
pub mod report;
pub mod sim;
mod text;

pub use error::{GofError, Result};
pub use exec::Execution;
pub use gpgof_core as core;
