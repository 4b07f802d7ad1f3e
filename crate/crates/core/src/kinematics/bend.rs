//! Hinge flexure limits over one crank revolution.
//!
//! A hinge's bend is its relative angle measured from the assembly pose
//! (crank angle 0); the reported value is the largest excursion over the cycle.
//! J1-J3 are the crank bearings and rotate fully, so they are reported but not
//! limited.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gait::phase_grid;
use super::linkage::{sweep, wrap_angle, LinkageDesign, LinkageState, JOINT_COUNT};
use crate::error::KinematicsError;

const DEG: f64 = PI / 180.0;

pub const MIN_BEND_SAMPLES: usize = 360;

/// Per-joint limit (radians); `None` for full-rotation bearings.
pub fn bend_limits() -> [Option<f64>; JOINT_COUNT] {
    let other = Some(50.0 * DEG);
    let radius = Some(90.0 * DEG);
    [
        None,
        None,
        None,
        Some(70.0 * DEG),
        other,
        radius,
        other,
        other,
        radius,
        radius,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendReport {
    /// Max excursion per joint J1..J10, radians.
    pub max_bend_angles: [f64; JOINT_COUNT],
    pub pass: bool,
    /// Joints (1-based) over their limit.
    pub violations: Vec<usize>,
}

pub fn max_bends(states: &[LinkageState]) -> [f64; JOINT_COUNT] {
    let mut out = [0.0; JOINT_COUNT];
    let Some(first) = states.first() else {
        return out;
    };
    for s in states {
        for j in 0..JOINT_COUNT {
            let dev = wrap_angle(s.joint_bend_angles[j] - first.joint_bend_angles[j]).abs();
            out[j] = out[j].max(dev);
        }
    }
    out
}

pub fn evaluate_bends(max_bend_angles: [f64; JOINT_COUNT]) -> BendReport {
    let violations: Vec<usize> = bend_limits()
        .iter()
        .enumerate()
        .filter_map(|(j, lim)| match lim {
            Some(l) if max_bend_angles[j] > *l => Some(j + 1),
            _ => None,
        })
        .collect();
    BendReport {
        max_bend_angles,
        pass: violations.is_empty(),
        violations,
    }
}

pub fn bend_angle_check(
    design: &LinkageDesign,
    samples: usize,
) -> Result<BendReport, KinematicsError> {
    let states = sweep(design, &phase_grid(samples.max(MIN_BEND_SAMPLES)))?;
    Ok(evaluate_bends(max_bends(&states)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_design_has_no_bend() {
        let mut d = LinkageDesign::default();
        d.crank_radius_shoulder = 0.0;
        d.crank_radius_elbow = 0.0;
        let r = bend_angle_check(&d, 360).unwrap();
        assert!(r.pass);
        // the crank bearings still turn with the crank; every hinge is frozen
        assert!(r.max_bend_angles[3..].iter().all(|b| *b < 1e-12));
    }

    #[test]
    fn infeasible_design_propagates_assembly_error() {
        let mut d = LinkageDesign::default();
        d.coupler_lengths.drive_link *= 4.0;
        assert!(matches!(
            bend_angle_check(&d, 360),
            Err(KinematicsError::Assembly { .. })
        ));
    }

    #[test]
    fn limits_flag_violations_by_joint_number() {
        let mut bends = [0.0; JOINT_COUNT];
        bends[3] = 71.0 * DEG;
        bends[5] = 89.0 * DEG;
        bends[0] = PI;
        let r = evaluate_bends(bends);
        assert_eq!(r.violations, vec![4]);
        assert!(!r.pass);
    }
}
