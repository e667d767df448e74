//! Library side of the `agmstl` command-line tool: problem configuration and subcommands.

pub mod commands;
pub mod config;

pub use config::{Problem, ProblemConfig};
