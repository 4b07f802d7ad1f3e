//! Planar forward kinematics of the crank/four-bar armwing.
//!
//! Topology (7 links, 10 joints):
//!
//! ```text
//!  L1 crank disc   J1 (ground), pins J2 (shoulder) and J3 (elbow, +Δφ)
//!  L2 shoulder coupler  J2 - J4
//!  L5 humerus           J5 (shoulder pivot, ground) - J4 (lever) - J6 (elbow)
//!  L3 elbow coupler     J3 - J7
//!  L6 elbow rocker      J8 (ground) - J7, J9
//!  L7 radius drive link J9 - J10
//!  L4 radius            J6 - J10 (extension behind the elbow), wingtip
//! ```
//!
//! Every closure is solved as a circle-circle intersection. Angles follow the
//! wing convention: θ_s is the humerus elevation above the body horizontal and
//! θ_e is the included elbow angle, 180° for a straight arm.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::KinematicsError;

pub type Point2 = Vector2<f64>;

pub const JOINT_COUNT: usize = 10;

/// Length of the optimisable design vector (see [`LinkageDesign::to_vector`]).
pub const DESIGN_DIM: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerLengths {
    /// L2, crank pin J2 to humerus lever J4.
    pub shoulder_coupler: f64,
    /// Shoulder pivot J5 to J4 on the humerus.
    pub shoulder_lever: f64,
    /// L3, crank pin J3 to rocker J7.
    pub elbow_coupler: f64,
    /// Rocker pivot J8 to J7.
    pub elbow_rocker: f64,
    /// Rocker pivot J8 to J9.
    pub rocker_drive_arm: f64,
    /// L7, J9 to J10.
    pub drive_link: f64,
    /// Elbow J6 to J10 on the radius extension.
    pub radius_extension: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundPivots {
    /// J5, body-frame position relative to the crank axis J1.
    pub shoulder: [f64; 2],
    /// J8.
    pub elbow_rocker: [f64; 2],
}

/// Fixed angular offsets inside the ternary links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeverOffsets {
    /// Angle from the humerus axis to the lever arm J5→J4.
    pub shoulder_lever: f64,
    /// Angle from J8→J7 to J8→J9 on the rocker.
    pub rocker: f64,
    /// Angle from the reversed radius axis to the extension J6→J10.
    pub radius_extension: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkageDesign {
    pub humerus_length: f64,
    pub radius_length: f64,
    pub crank_radius_shoulder: f64,
    pub crank_radius_elbow: f64,
    pub coupler_lengths: CouplerLengths,
    pub ground_pivot_positions: GroundPivots,
    pub lever_offsets: LeverOffsets,
    /// Δφ between the elbow and shoulder crank pins.
    pub phase_offset: f64,
    /// Motor-to-crank reduction.
    pub gear_ratio: f64,
}

impl Default for LinkageDesign {
    fn default() -> Self {
        Self {
            humerus_length: 0.050,
            radius_length: 0.090,
            crank_radius_shoulder: 0.002358,
            crank_radius_elbow: 0.003526,
            coupler_lengths: CouplerLengths {
                shoulder_coupler: 0.025089,
                shoulder_lever: 0.004085,
                elbow_coupler: 0.050491,
                elbow_rocker: 0.006538,
                rocker_drive_arm: 0.083811,
                drive_link: 0.037155,
                radius_extension: 0.037292,
            },
            ground_pivot_positions: GroundPivots {
                shoulder: [-0.003886, -0.025415],
                elbow_rocker: [-0.014189, -0.049982],
            },
            lever_offsets: LeverOffsets {
                shoulder_lever: 0.278013,
                rocker: 0.273096,
                radius_extension: -2.300602,
            },
            phase_offset: -0.518785,
            gear_ratio: 75.0,
        }
    }
}

impl LinkageDesign {
    /// Crank angle produced by a motor shaft angle through the gearbox.
    pub fn crank_angle_from_motor(&self, motor_angle: f64) -> f64 {
        motor_angle / self.gear_ratio
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let c = &self.coupler_lengths;
        let positive = [
            ("humerus_length", self.humerus_length),
            ("radius_length", self.radius_length),
            ("shoulder_coupler", c.shoulder_coupler),
            ("shoulder_lever", c.shoulder_lever),
            ("elbow_coupler", c.elbow_coupler),
            ("elbow_rocker", c.elbow_rocker),
            ("rocker_drive_arm", c.rocker_drive_arm),
            ("drive_link", c.drive_link),
            ("radius_extension", c.radius_extension),
            ("gear_ratio", self.gear_ratio),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(KinematicsError::InvalidDesign(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        // a zero crank radius is a legal (degenerate, stationary) drive
        for (name, v) in [
            ("crank_radius_shoulder", self.crank_radius_shoulder),
            ("crank_radius_elbow", self.crank_radius_elbow),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(KinematicsError::InvalidDesign(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Optimisable parameters; the humerus/radius lengths and gear ratio are held fixed.
    pub fn to_vector(&self) -> [f64; DESIGN_DIM] {
        let c = &self.coupler_lengths;
        let g = &self.ground_pivot_positions;
        let o = &self.lever_offsets;
        [
            self.crank_radius_shoulder,
            self.crank_radius_elbow,
            c.shoulder_coupler,
            c.shoulder_lever,
            c.elbow_coupler,
            c.elbow_rocker,
            c.rocker_drive_arm,
            c.drive_link,
            c.radius_extension,
            g.shoulder[0],
            g.shoulder[1],
            g.elbow_rocker[0],
            g.elbow_rocker[1],
            o.shoulder_lever,
            o.rocker,
            o.radius_extension,
            self.phase_offset,
        ]
    }

    pub fn with_vector(&self, x: &[f64]) -> Self {
        assert_eq!(x.len(), DESIGN_DIM, "design vector length");
        Self {
            humerus_length: self.humerus_length,
            radius_length: self.radius_length,
            crank_radius_shoulder: x[0],
            crank_radius_elbow: x[1],
            coupler_lengths: CouplerLengths {
                shoulder_coupler: x[2],
                shoulder_lever: x[3],
                elbow_coupler: x[4],
                elbow_rocker: x[5],
                rocker_drive_arm: x[6],
                drive_link: x[7],
                radius_extension: x[8],
            },
            ground_pivot_positions: GroundPivots {
                shoulder: [x[9], x[10]],
                elbow_rocker: [x[11], x[12]],
            },
            lever_offsets: LeverOffsets {
                shoulder_lever: x[13],
                rocker: x[14],
                radius_extension: x[15],
            },
            phase_offset: x[16],
            gear_ratio: self.gear_ratio,
        }
    }

    /// Every (joint, joint, length) pair that a valid state must honour.
    pub fn link_constraints(&self) -> Vec<(usize, usize, f64)> {
        let c = &self.coupler_lengths;
        vec![
            (0, 1, self.crank_radius_shoulder),
            (0, 2, self.crank_radius_elbow),
            (1, 3, c.shoulder_coupler),
            (4, 3, c.shoulder_lever),
            (4, 5, self.humerus_length),
            (2, 6, c.elbow_coupler),
            (7, 6, c.elbow_rocker),
            (7, 8, c.rocker_drive_arm),
            (8, 9, c.drive_link),
            (5, 9, c.radius_extension),
        ]
    }
}

/// Joint positions J1..J10 (index 0..9) plus the derived arm angles.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkageState {
    pub crank_angle: f64,
    pub theta_s: f64,
    pub theta_e: f64,
    pub joint_positions: [Point2; JOINT_COUNT],
    /// Relative angle between the two links meeting at each joint.
    pub joint_bend_angles: [f64; JOINT_COUNT],
    pub wingtip: Point2,
}

/// Wrap into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn heading(v: Point2) -> f64 {
    v.y.atan2(v.x)
}

fn unit(a: f64) -> Point2 {
    Point2::new(a.cos(), a.sin())
}

/// Both intersections of circle(a, ra) and circle(b, rb); element 0 lies to the
/// left of the directed line a→b (the "open" branch).
pub fn circle_intersections(a: Point2, ra: f64, b: Point2, rb: f64) -> Option<[Point2; 2]> {
    let d = b - a;
    let dist = d.norm();
    if dist < 1e-15 {
        return None;
    }
    let along = (ra * ra - rb * rb + dist * dist) / (2.0 * dist);
    let mut h2 = ra * ra - along * along;
    if h2 < 0.0 {
        // tangency lost to rounding
        if h2 > -1e-18 {
            h2 = 0.0;
        } else {
            return None;
        }
    }
    let u = d / dist;
    let perp = Point2::new(-u.y, u.x);
    let base = a + u * along;
    let h = h2.sqrt();
    Some([base + perp * h, base - perp * h])
}

/// Branch choice for each circle intersection.
#[derive(Debug, Clone, Copy)]
enum Branch<'a> {
    Open,
    NearestTo(&'a LinkageState),
}

fn pick(sols: [Point2; 2], branch: Branch<'_>, joint: usize) -> Point2 {
    match branch {
        Branch::Open => sols[0],
        Branch::NearestTo(prev) => {
            let p = prev.joint_positions[joint];
            if (sols[0] - p).norm_squared() <= (sols[1] - p).norm_squared() {
                sols[0]
            } else {
                sols[1]
            }
        }
    }
}

fn solve(
    design: &LinkageDesign,
    crank_angle: f64,
    branch: Branch<'_>,
) -> Result<LinkageState, KinematicsError> {
    let c = &design.coupler_lengths;
    let o = &design.lever_offsets;
    let fail = |loop_name| KinematicsError::Assembly {
        crank_angle,
        loop_name,
    };

    let j1 = Point2::zeros();
    let j2 = j1 + unit(crank_angle) * design.crank_radius_shoulder;
    let j3 = j1 + unit(crank_angle + design.phase_offset) * design.crank_radius_elbow;
    let j5 = Point2::from(design.ground_pivot_positions.shoulder);
    let j8 = Point2::from(design.ground_pivot_positions.elbow_rocker);

    let j4 = pick(
        circle_intersections(j2, c.shoulder_coupler, j5, c.shoulder_lever)
            .ok_or_else(|| fail("shoulder"))?,
        branch,
        3,
    );
    let theta_s = wrap_angle(heading(j4 - j5) - o.shoulder_lever);
    let j6 = j5 + unit(theta_s) * design.humerus_length;

    let j7 = pick(
        circle_intersections(j3, c.elbow_coupler, j8, c.elbow_rocker)
            .ok_or_else(|| fail("elbow rocker"))?,
        branch,
        6,
    );
    let rocker = heading(j7 - j8);
    let j9 = j8 + unit(rocker + o.rocker) * c.rocker_drive_arm;

    let j10 = pick(
        circle_intersections(j6, c.radius_extension, j9, c.drive_link)
            .ok_or_else(|| fail("radius drive"))?,
        branch,
        9,
    );
    let radius_heading = heading(j10 - j6) + PI - o.radius_extension;
    let wingtip = j6 + unit(radius_heading) * design.radius_length;
    let theta_e = PI - wrap_angle(radius_heading - theta_s);

    let joints = [j1, j2, j3, j4, j5, j6, j7, j8, j9, j10];
    let rel = |a: f64, b: f64| wrap_angle(a - b);
    let shoulder_coupler = heading(j4 - j2);
    let elbow_coupler = heading(j7 - j3);
    let drive = heading(j10 - j9);
    let bends = [
        wrap_angle(crank_angle),
        rel(shoulder_coupler, crank_angle),
        rel(elbow_coupler, crank_angle + design.phase_offset),
        rel(shoulder_coupler, heading(j4 - j5)),
        theta_s,
        theta_e,
        rel(elbow_coupler, rocker),
        wrap_angle(rocker),
        rel(drive, heading(j9 - j8)),
        rel(drive, heading(j10 - j6)),
    ];

    Ok(LinkageState {
        crank_angle,
        theta_s,
        theta_e,
        joint_positions: joints,
        joint_bend_angles: bends,
        wingtip,
    })
}

/// Closes the mechanism at `crank_angle` on the open branch of every loop.
pub fn forward_kinematics(
    design: &LinkageDesign,
    crank_angle: f64,
) -> Result<LinkageState, KinematicsError> {
    solve(design, crank_angle, Branch::Open)
}

/// Closes the mechanism choosing, per loop, the solution nearest to `previous`.
pub fn forward_kinematics_continuous(
    design: &LinkageDesign,
    crank_angle: f64,
    previous: &LinkageState,
) -> Result<LinkageState, KinematicsError> {
    solve(design, crank_angle, Branch::NearestTo(previous))
}

/// Continuity-tracked sweep: the first sample uses the open branch.
pub fn sweep(
    design: &LinkageDesign,
    crank_angles: &[f64],
) -> Result<Vec<LinkageState>, KinematicsError> {
    let mut out: Vec<LinkageState> = Vec::with_capacity(crank_angles.len());
    for &a in crank_angles {
        let s = match out.last() {
            None => forward_kinematics(design, a)?,
            Some(prev) => forward_kinematics_continuous(design, a, prev)?,
        };
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Law-of-cosines construction, written independently of
    /// `circle_intersections`: the apex of triangle (a, b, p) with |ap| = ra,
    /// |bp| = rb, on the left of a→b.
    fn triangle_apex(a: Point2, ra: f64, b: Point2, rb: f64) -> Point2 {
        let d = (b - a).norm();
        let cos_alpha = (ra * ra + d * d - rb * rb) / (2.0 * ra * d);
        let alpha = cos_alpha.clamp(-1.0, 1.0).acos();
        let base = (b.y - a.y).atan2(b.x - a.x);
        a + Point2::new((base + alpha).cos(), (base + alpha).sin()) * ra
    }

    #[test]
    fn isosceles_triangle_apex_sits_over_midpoint() {
        let p = triangle_apex(Point2::new(0.01, 0.0), 0.02, Point2::new(0.03, 0.0), 0.02);
        assert_abs_diff_eq!(p.x, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(
            p.y,
            (0.02f64.powi(2) - 0.01f64.powi(2)).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn shoulder_lever_matches_geometric_construction() {
        let d = LinkageDesign::default();
        let c = &d.coupler_lengths;
        let j5 = Point2::from(d.ground_pivot_positions.shoulder);
        for k in 0..36 {
            let phi = k as f64 * 10.0_f64.to_radians();
            let s = forward_kinematics(&d, phi).unwrap();
            let j2 = s.joint_positions[1];
            let left = triangle_apex(j2, c.shoulder_coupler, j5, c.shoulder_lever);
            let right = triangle_apex(j5, c.shoulder_lever, j2, c.shoulder_coupler);
            let j4 = s.joint_positions[3];
            let err = (j4 - left).norm().min((j4 - right).norm());
            assert!(err < 1e-9, "crank {phi}: J4 off both apexes by {err}");
        }
    }

    #[test]
    fn circle_intersection_orders_left_branch_first() {
        let [l, r] =
            circle_intersections(Point2::zeros(), 1.0, Point2::new(1.0, 0.0), 1.0).unwrap();
        assert!(l.y > 0.0 && r.y < 0.0);
        assert!(circle_intersections(Point2::zeros(), 1.0, Point2::new(3.0, 0.0), 1.0).is_none());
    }

    #[test]
    fn default_design_preserves_link_lengths() {
        let d = LinkageDesign::default();
        let states = sweep(&d, &crate::kinematics::gait::phase_grid(360)).unwrap();
        for s in &states {
            for (i, j, len) in d.link_constraints() {
                let dist = (s.joint_positions[i] - s.joint_positions[j]).norm();
                assert_abs_diff_eq!(dist, len, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn zero_crank_is_stationary() {
        let mut d = LinkageDesign::default();
        d.crank_radius_shoulder = 0.0;
        d.crank_radius_elbow = 0.0;
        let first = forward_kinematics(&d, 0.0).unwrap();
        for k in 0..72 {
            let s = forward_kinematics(&d, k as f64 * 0.0873).unwrap();
            assert_abs_diff_eq!(s.theta_s, first.theta_s, epsilon = 1e-12);
            assert_abs_diff_eq!(s.theta_e, first.theta_e, epsilon = 1e-12);
        }
    }

    #[test]
    fn unreachable_loop_reports_assembly_error() {
        let mut d = LinkageDesign::default();
        d.coupler_lengths.shoulder_coupler = 0.2;
        let err = forward_kinematics(&d, 0.0).unwrap_err();
        assert!(matches!(
            err,
            KinematicsError::Assembly {
                loop_name: "shoulder",
                ..
            }
        ));
    }

    #[test]
    fn wrap_angle_range() {
        for k in -100..100 {
            let w = wrap_angle(k as f64 * 0.77);
            assert!(w > -PI && w <= PI);
        }
        assert_abs_diff_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn gear_ratio_scales_motor_angle() {
        let d = LinkageDesign::default();
        assert_abs_diff_eq!(d.crank_angle_from_motor(75.0 * TAU), TAU, epsilon = 1e-12);
    }
}
