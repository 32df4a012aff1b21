//! Verification suites, reports and the `kforge` command line.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

pub use commands::main_with_args;
