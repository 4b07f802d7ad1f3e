//! Guard rigid body, elastic suspension, reduced-order Aerobat, and the
//! coupled system.

pub mod aerobat;
pub mod coupled;
pub mod rigid;
pub mod suspension;

pub use aerobat::{
    aerobat_accelerations, center_of_mass, generalized_inertia, kinetic_energy, mass_points,
    strip_kinematics, wing_point, wingtip, AerobatFrame, AerobatParams, AerobatState, GaitSample,
    GuardMotion, MovingPoint, StripKinematics,
};
pub use coupled::{
    guard_rotation, hover_motors, CoupledModel, CoupledOutputs, CoupledState, DynamicsParams,
    AEROBAT_DIM, GUARD_DIM, SIDES,
};
pub use rigid::{
    body_wrench, euler_from_rotation, euler_rate_bias, euler_rate_matrix, guard_derivatives,
    normalize_quaternion, rotation_from_euler, skew, BodyWrench, GuardDerivative, GuardParams,
    GuardState, GRAVITY,
};
pub use suspension::{
    band_damping_wrench, potential_energy, suspension_wrench, Band, BodyMotion, Pose,
    SuspensionParams, SuspensionWrench,
};
