//! Simulation core for a flapping-wing micro aerial vehicle suspended in a
//! protective guard by elastic bands.

pub mod aero;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod sim;

pub use error::*;
