//! Unsteady strip aerodynamics: Fourier circulation, lifting-line induced
//! kinematics and a two-state Wagner lag per strip.

pub mod geometry;
pub mod model;
pub mod output;
pub mod wagner;

pub use geometry::{circulation, strip_theta, Strip, WingGeometry};
pub use model::{aero_step, AeroModel, AeroParams, AeroState, LagRealization};
pub use output::{aero_output, strip_inputs, AeroOutput, StripFlow, StripForcing};
pub use wagner::{wagner_response_oracle, WagnerCoeffs, WagnerMode};
