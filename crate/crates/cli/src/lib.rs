//! Batch runner for the `ncsym` verification suites.
//!
//! A run resolves a [`VerifyConfig`] from defaults, an optional flat config file and
//! command-line flags, executes one suite and emits a [`VerifyReport`] as JSON or CSV.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{parse_args, CliError, Format, Invocation, Suite, VerifyConfig};
pub use report::{emit_report, write_report, Record, VerifyReport};
pub use suites::run_suite;
