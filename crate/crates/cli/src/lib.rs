//! Batch front end for the `soler` command.

pub mod config;
pub mod execute;
