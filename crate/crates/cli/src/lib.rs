//! Config-driven front end for `relbundle-core`: parsing, runs, invariant
//! suites, Green kernel export and Hamiltonian dumps.

pub mod check;
pub mod config;
pub mod error;
pub mod run;

pub use check::{check, CheckLine, SUITES};
pub use config::{parse_config, RunConfig};
pub use error::{CliError, ConfigError};
pub use run::{green, reduce, run, GreenReport, RunReport};
