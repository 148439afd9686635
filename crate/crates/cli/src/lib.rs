//! Scenario files, figure presets and the run driver behind the `djc` binary.

pub mod config;
pub mod presets;
pub mod runner;
