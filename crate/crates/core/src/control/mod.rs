//! Extended-state observer, hover control law and thrust allocation.

pub mod allocation;
pub mod law;
pub mod observer;

pub use allocation::{allocate_motors, allocate_saturating, thrust_map, Allocation};
pub use law::{control_law, ControlOutput, ControlParams, FeedbackMode, Setpoint};
pub use observer::{
    characteristic_polynomial, observer_step, observer_step_with, place_observer_poles, pose_error,
    wrap_angle, ObserverGains, ObserverState, PlantModel,
};
