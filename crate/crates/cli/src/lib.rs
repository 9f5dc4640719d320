//! Scenario loading, subcommand drivers and the catalogue of scripted
//! examples behind the `meromap` binary.

pub mod commands;
pub mod reproduce;
pub mod scenario;
