//! Configuration and subcommands behind the `superint` binary.

// Negated float comparisons are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{CliError, Options};
pub use config::{ConfigError, Format, ModelConfig, SCHEMA_VERSION};
