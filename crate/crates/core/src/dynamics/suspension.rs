//! Elastic bands between the guard and the Aerobat body.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    /// Guard body frame.
    pub guard_point: [f64; 3],
    /// Aerobat body frame.
    pub aerobat_point: [f64; 3],
    pub rest_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuspensionParams {
    pub stiffness: f64,
    /// Dashpot coefficient of each taut band along its length, N·s/m.
    pub damping: f64,
    pub bands: Vec<Band>,
    /// Semi-axes of the guard envelope that attachment points must lie within.
    pub envelope: [f64; 3],
}

impl Default for SuspensionParams {
    /// Four anchor points on the Aerobat, each tied to an upper and a lower guard point.
    fn default() -> Self {
        let r_a = 0.02;
        let r_g = 0.12;
        let h = 0.10;
        let rest_length = 0.10;
        let dirs = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let bands = dirs
            .iter()
            .flat_map(|d| {
                [h, -h].map(|z| Band {
                    guard_point: [r_g * d[0], r_g * d[1], z],
                    aerobat_point: [r_a * d[0], r_a * d[1], 0.0],
                    rest_length,
                })
            })
            .collect();
        Self {
            stiffness: 45.0,
            damping: 0.05,
            bands,
            envelope: [0.30, 0.30, 0.20],
        }
    }
}

impl SuspensionParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.stiffness > 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "band stiffness {}",
                self.stiffness
            )));
        }
        if !(self.damping >= 0.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "band damping {}",
                self.damping
            )));
        }
        if self.bands.len() < 2 {
            return Err(DynamicsError::InvalidParams(
                "at least two bands are required".into(),
            ));
        }
        for (i, b) in self.bands.iter().enumerate() {
            let g = b.guard_point;
            let e = self.envelope;
            let inside =
                (g[0] / e[0]).powi(2) + (g[1] / e[1]).powi(2) + (g[2] / e[2]).powi(2) <= 1.0;
            if !inside || !(b.rest_length >= 0.0) {
                return Err(DynamicsError::InvalidParams(format!(
                    "band {i}: guard point outside the envelope or negative rest length"
                )));
            }
        }
        Ok(())
    }
}

/// World pose of a rigid body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionWrench {
    /// Net band force on the guard, world frame.
    pub guard_force: Vector3<f64>,
    /// Net band moment on the guard about its origin, guard body frame.
    pub guard_moment_body: Vector3<f64>,
    /// Net band force on the Aerobat, world frame.
    pub aerobat_force: Vector3<f64>,
    /// Net band moment on the Aerobat about its origin, world frame.
    pub aerobat_moment: Vector3<f64>,
    pub tensions: Vec<f64>,
}

pub fn suspension_wrench(guard: &Pose, aerobat: &Pose, p: &SuspensionParams) -> SuspensionWrench {
    let mut out = SuspensionWrench {
        guard_force: Vector3::zeros(),
        guard_moment_body: Vector3::zeros(),
        aerobat_force: Vector3::zeros(),
        aerobat_moment: Vector3::zeros(),
        tensions: Vec::with_capacity(p.bands.len()),
    };
    for b in &p.bands {
        let rg = guard.rotation * Vector3::from(b.guard_point);
        let ra = aerobat.rotation * Vector3::from(b.aerobat_point);
        let d = (guard.position + rg) - (aerobat.position + ra);
        let len = d.norm();
        let tension = p.stiffness * (len - b.rest_length).max(0.0);
        out.tensions.push(tension);
        if tension == 0.0 || len == 0.0 {
            continue;
        }
        // pulls the Aerobat point towards the guard point
        let f = d * (tension / len);
        out.aerobat_force += f;
        out.aerobat_moment += ra.cross(&f);
        out.guard_force -= f;
        out.guard_moment_body +=
            Vector3::from(b.guard_point).cross(&(guard.rotation.transpose() * -f));
    }
    out
}

/// Pose with world-frame linear and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyMotion {
    pub pose: Pose,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl BodyMotion {
    fn point(&self, local: &[f64; 3]) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let r = self.pose.rotation * Vector3::from(*local);
        (
            self.pose.position + r,
            self.velocity + self.angular_velocity.cross(&r),
            r,
        )
    }
}

/// Dashpot part of the band forces: c times the stretch rate along each taut
/// band, limited so no band pushes.
pub fn band_damping_wrench(
    guard: &BodyMotion,
    aerobat: &BodyMotion,
    p: &SuspensionParams,
) -> SuspensionWrench {
    let mut out = SuspensionWrench {
        guard_force: Vector3::zeros(),
        guard_moment_body: Vector3::zeros(),
        aerobat_force: Vector3::zeros(),
        aerobat_moment: Vector3::zeros(),
        tensions: Vec::with_capacity(p.bands.len()),
    };
    for b in &p.bands {
        let (xg, vg, _) = guard.point(&b.guard_point);
        let (xa, va, ra) = aerobat.point(&b.aerobat_point);
        let d = xg - xa;
        let len = d.norm();
        let stretch = len - b.rest_length;
        if p.damping == 0.0 || stretch <= 0.0 || len == 0.0 {
            out.tensions.push(0.0);
            continue;
        }
        let u = d / len;
        let rate = u.dot(&(vg - va));
        let tension = (p.damping * rate).max(-p.stiffness * stretch);
        out.tensions.push(tension);
        let f = u * tension;
        out.aerobat_force += f;
        out.aerobat_moment += ra.cross(&f);
        out.guard_force -= f;
        out.guard_moment_body +=
            Vector3::from(b.guard_point).cross(&(guard.pose.rotation.transpose() * -f));
    }
    out
}

/// Band elastic energy plus the Aerobat's gravitational energy at its origin.
pub fn potential_energy(
    guard: &Pose,
    aerobat: &Pose,
    p: &SuspensionParams,
    aerobat_mass: f64,
    g: f64,
) -> f64 {
    let elastic: f64 = p
        .bands
        .iter()
        .map(|b| {
            let d = (guard.position + guard.rotation * Vector3::from(b.guard_point))
                - (aerobat.position + aerobat.rotation * Vector3::from(b.aerobat_point));
            let s = (d.norm() - b.rest_length).max(0.0);
            0.5 * p.stiffness * s * s
        })
        .sum();
    elastic + aerobat_mass * g * aerobat.position.z
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use proptest::prelude::*;

    fn level(p: Vector3<f64>) -> Pose {
        Pose {
            position: p,
            rotation: Matrix3::identity(),
        }
    }

    fn moving(p: Vector3<f64>, v: Vector3<f64>, w: Vector3<f64>) -> BodyMotion {
        BodyMotion {
            pose: level(p),
            velocity: v,
            angular_velocity: w,
        }
    }

    #[test]
    fn damping_vanishes_for_common_translation() {
        let p = SuspensionParams::default();
        let v = Vector3::new(0.3, -1.0, 2.0);
        let w = band_damping_wrench(
            &moving(Vector3::zeros(), v, Vector3::zeros()),
            &moving(Vector3::zeros(), v, Vector3::zeros()),
            &p,
        );
        assert!(w.aerobat_force.norm() < 1e-15 && w.guard_force.norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn damping_never_adds_energy(
            v in prop::array::uniform3(-2.0f64..2.0),
            w in prop::array::uniform3(-5.0f64..5.0),
            dz in -0.01f64..0.01,
        ) {
            let p = SuspensionParams::default();
            let guard = moving(Vector3::zeros(), Vector3::zeros(), Vector3::zeros());
            let (v, w) = (Vector3::from(v), Vector3::from(w));
            let aerobat = moving(Vector3::new(0.0, 0.0, dz), v, w);
            let d = band_damping_wrench(&guard, &aerobat, &p);
            let power = d.aerobat_force.dot(&v) + d.aerobat_moment.dot(&w);
            prop_assert!(power <= 1e-12, "damping power {power}");
            prop_assert!((d.aerobat_force + d.guard_force).norm() < 1e-12);
        }
    }

    #[test]
    fn default_layout_is_valid_and_balanced() {
        let p = SuspensionParams::default();
        p.validate().unwrap();
        assert_eq!(p.bands.len(), 8);
        let w = suspension_wrench(&level(Vector3::zeros()), &level(Vector3::zeros()), &p);
        assert!(w.aerobat_force.norm() < 1e-14);
        assert!(w.aerobat_moment.norm() < 1e-14);
        assert!(w.tensions.iter().all(|t| *t > 0.0));
    }

    #[test]
    fn bands_at_rest_exert_no_force() {
        let mut p = SuspensionParams::default();
        for b in &mut p.bands {
            let d = Vector3::from(b.guard_point) - Vector3::from(b.aerobat_point);
            b.rest_length = d.norm();
        }
        let w = suspension_wrench(&level(Vector3::zeros()), &level(Vector3::zeros()), &p);
        assert!(w.guard_force.norm() < 1e-12 && w.aerobat_force.norm() < 1e-12);
    }

    #[test]
    fn slack_band_pushes_nothing() {
        let mut p = SuspensionParams::default();
        p.bands.iter_mut().for_each(|b| b.rest_length = 1.0);
        let w = suspension_wrench(
            &level(Vector3::zeros()),
            &level(Vector3::new(0.01, 0.0, 0.02)),
            &p,
        );
        assert_eq!(w.aerobat_force, Vector3::zeros());
    }

    proptest! {
        #[test]
        fn rigid_translation_leaves_forces_unchanged(
            dx in -1.0f64..1.0, dy in -1.0f64..1.0, dz in -1.0f64..1.0,
            ax in -0.01f64..0.01, az in -0.01f64..0.01,
        ) {
            let p = SuspensionParams::default();
            let g = level(Vector3::zeros());
            let a = level(Vector3::new(ax, 0.0, az));
            let shift = Vector3::new(dx, dy, dz);
            let w0 = suspension_wrench(&g, &a, &p);
            let w1 = suspension_wrench(&level(shift), &level(a.position + shift), &p);
            prop_assert!((w0.aerobat_force - w1.aerobat_force).norm() < 1e-12);
            prop_assert!((w0.guard_moment_body - w1.guard_moment_body).norm() < 1e-12);
        }

        #[test]
        fn third_law_holds(
            ax in -0.02f64..0.02, ay in -0.02f64..0.02, az in -0.02f64..0.02,
            r in -0.3f64..0.3, pi in -0.3f64..0.3, yw in -0.3f64..0.3,
        ) {
            let p = SuspensionParams::default();
            let a = Pose { position: Vector3::new(ax, ay, az), rotation: *Rotation3::from_euler_angles(r, pi, yw).matrix() };
            let w = suspension_wrench(&level(Vector3::zeros()), &a, &p);
            prop_assert!((w.guard_force + w.aerobat_force).norm() < 1e-12);
        }
    }
}
