//! Library half of the `cgsat` command: run configuration, output writers
//! and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod output;
