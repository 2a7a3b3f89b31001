//! Library half of the `bqclab` command: configuration parsing and
//! subcommand execution.

pub mod config;
pub mod run;
