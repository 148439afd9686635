//! Holds the acceptance suite in `tests/acceptance.rs`.
//!
//! The suite lives in its own package so that `cargo test --workspace` runs it
//! after every other crate's tests: a failing criterion then cannot hide
//! results from the rest of the workspace.
