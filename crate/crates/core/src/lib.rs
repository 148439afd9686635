//! Entanglement dynamics of double Jaynes-Cummings systems.
//!
//! Two two-level atoms, each in its own single-mode cavity, start in an
//! entangled atomic state with both cavities in vacuum. The crate builds the
//! linear, multiphoton and nonlinearly pumped Hamiltonians, evolves the
//! joint state under Markovian cavity and atomic noise, computes the
//! atom-atom concurrence, and averages it over glassy coupling disorder.
//!
//! Units: ℏ = 1 and frequencies are measured in units of the cavity-B
//! coupling `G_B`. Time axes are reported both raw and as `G_B t / 2π`.

pub mod disorder;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod models;
pub mod scenario;

pub use error::{Error, Result};
