//! Command-line front end: configuration, run records, field dumps and the
//! subcommand implementations behind the `egpe` binary.

pub mod commands;
pub mod config;
pub mod dump;
pub mod record;
pub mod sweep;
