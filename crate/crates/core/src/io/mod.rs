//! Configuration, CSV output, reference-table validation and the
//! subcommand implementations used by the `bcsm` binary.

pub mod commands;
pub mod config;
pub mod csv;
pub mod validate;
