//! Simulation, integral-equation solving and tail asymptotics for the
//! all-time maximum of a critical branching Lévy process with β-stable
//! offspring.

pub mod asymptotics;
pub mod branching;
pub mod error;
pub mod fixedpoint;
pub mod levy;
pub mod offspring;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
