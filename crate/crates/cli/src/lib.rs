//! Experiment drivers behind the `projens` command.

pub mod config;
pub mod experiments;
pub mod table;
