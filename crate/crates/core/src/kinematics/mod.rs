//! Armwing gait targets, linkage kinematics and design synthesis.

pub mod bend;
pub mod fit;
pub mod gait;
pub mod linkage;
pub mod nelder_mead;
pub mod optimize;

pub use bend::{bend_angle_check, bend_limits, BendReport};
pub use fit::r_squared;
pub use gait::{phase_grid, sample_targets, target_gait, GaitTargets};
pub use linkage::{
    forward_kinematics, forward_kinematics_continuous, sweep, CouplerLengths, GroundPivots,
    LeverOffsets, LinkageDesign, LinkageState, JOINT_COUNT,
};
pub use optimize::{
    evaluate_design, optimize_linkage, DesignBounds, OptimizationReport, OptimizerSettings,
    TrackingObjective,
};
