//! Reduced-order Aerobat: a lumped-mass body whose wings follow a prescribed
//! gait, moving relative to the guard in position p_A and Z-Y-X angles q_A.
//!
//! Wing geometry in the Aerobat frame (x forward, y left, z up), side σ = ±1:
//!
//! ```text
//! shoulder = (0, σ y_sh, 0)
//! û        = (0, σ cos θ_s, sin θ_s)          humerus direction
//! d        = −cos θ_e û − sin θ_e x̂           radius direction (θ_e = π: straight)
//! elbow    = shoulder + H û
//! tip      = elbow + R d
//! ```

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::rigid::{euler_rate_bias, euler_rate_matrix, rotation_from_euler, skew, GuardState};
use crate::aero::WingGeometry;
use crate::error::DynamicsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AerobatParams {
    pub body_mass: f64,
    /// Per side.
    pub proximal_mass: f64,
    /// Per side.
    pub distal_mass: f64,
    /// Principal moments of the central body.
    pub body_inertia: [f64; 3],
    pub shoulder_offset: f64,
    pub humerus_length: f64,
    pub radius_length: f64,
    pub flapping_frequency: f64,
}

impl Default for AerobatParams {
    fn default() -> Self {
        Self {
            body_mass: 0.035,
            proximal_mass: 0.003,
            distal_mass: 0.002,
            body_inertia: [1e-5, 3e-5, 3e-5],
            shoulder_offset: 0.01,
            humerus_length: 0.050,
            radius_length: 0.090,
            flapping_frequency: 8.0,
        }
    }
}

impl AerobatParams {
    pub fn mass(&self) -> f64 {
        self.body_mass + 2.0 * (self.proximal_mass + self.distal_mass)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let positive = [
            self.body_mass,
            self.humerus_length,
            self.radius_length,
            self.body_inertia[0],
            self.body_inertia[1],
            self.body_inertia[2],
        ];
        if positive.iter().any(|v| !(*v > 0.0))
            || self.proximal_mass < 0.0
            || self.distal_mass < 0.0
        {
            return Err(DynamicsError::InvalidParams(
                "Aerobat masses, inertia and links must be positive".into(),
            ));
        }
        if !(self.flapping_frequency >= 0.0 && self.flapping_frequency <= 8.0) {
            return Err(DynamicsError::InvalidParams(format!(
                "flapping frequency {} Hz outside [0, 8]",
                self.flapping_frequency
            )));
        }
        Ok(())
    }
}

/// Symmetric wing joint trajectory sample: [θ_s, θ_e] and derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitSample {
    pub angle: [f64; 2],
    pub rate: [f64; 2],
    pub accel: [f64; 2],
}

impl GaitSample {
    /// Wings level and straight, at rest.
    pub fn neutral() -> Self {
        Self {
            angle: [0.0, std::f64::consts::PI],
            rate: [0.0; 2],
            accel: [0.0; 2],
        }
    }

    pub fn frozen(theta_s: f64, theta_e: f64) -> Self {
        Self {
            angle: [theta_s, theta_e],
            rate: [0.0; 2],
            accel: [0.0; 2],
        }
    }
}

/// A point moving in the Aerobat frame: position, velocity, acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingPoint {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
    pub a: Vector3<f64>,
}

struct WingFrame {
    shoulder: Vector3<f64>,
    u: MovingPoint,
    d: MovingPoint,
    chord_radius: Vector3<f64>,
    normal: Vector3<f64>,
}

fn wing_frame(p: &AerobatParams, gait: &GaitSample, side: f64) -> WingFrame {
    let [ts, te] = gait.angle;
    let [dts, dte] = gait.rate;
    let [ats, ate] = gait.accel;
    let (ss, cs) = ts.sin_cos();
    let (se, ce) = te.sin_cos();
    let x = Vector3::x();
    let u = Vector3::new(0.0, side * cs, ss);
    let u_perp = Vector3::new(0.0, -side * ss, cs);
    let du = u_perp * dts;
    let ddu = u_perp * ats - u * (dts * dts);
    let d = -u * ce - x * se;
    let dd = u * (se * dte) - du * ce - x * (ce * dte);
    let ddd = u * (ce * dte * dte + se * ate) + du * (2.0 * se * dte) - ddu * ce
        + x * (se * dte * dte - ce * ate);
    WingFrame {
        shoulder: Vector3::new(0.0, side * p.shoulder_offset, 0.0),
        u: MovingPoint {
            r: u,
            v: du,
            a: ddu,
        },
        d: MovingPoint {
            r: d,
            v: dd,
            a: ddd,
        },
        chord_radius: x * (-ce) + u * se,
        normal: -u.cross(&x) * side,
    }
}

/// Point at arc length `s` from the body centre along one wing, with its chord
/// axis and normal (Aerobat frame).
pub fn wing_point(
    p: &AerobatParams,
    gait: &GaitSample,
    side: f64,
    s: f64,
) -> (MovingPoint, Vector3<f64>, Vector3<f64>) {
    let w = wing_frame(p, gait, side);
    let x = Vector3::x();
    let h = p.humerus_length;
    if s <= p.shoulder_offset {
        let r = Vector3::new(0.0, side * s, 0.0);
        let z = Vector3::zeros();
        (MovingPoint { r, v: z, a: z }, x, Vector3::z())
    } else if s <= p.shoulder_offset + h {
        let l = s - p.shoulder_offset;
        (
            MovingPoint {
                r: w.shoulder + w.u.r * l,
                v: w.u.v * l,
                a: w.u.a * l,
            },
            x,
            w.normal,
        )
    } else {
        let l = s - p.shoulder_offset - h;
        let pt = MovingPoint {
            r: w.shoulder + w.u.r * h + w.d.r * l,
            v: w.u.v * h + w.d.v * l,
            a: w.u.a * h + w.d.a * l,
        };
        (pt, w.chord_radius, w.normal)
    }
}

pub fn wingtip(p: &AerobatParams, gait: &GaitSample, side: f64) -> Vector3<f64> {
    wing_point(
        p,
        gait,
        side,
        p.shoulder_offset + p.humerus_length + p.radius_length,
    )
    .0
    .r
}

/// Lumped masses with their Aerobat-frame motion; index 0 is the body.
pub fn mass_points(p: &AerobatParams, gait: &GaitSample) -> [(f64, MovingPoint); 5] {
    let z = Vector3::zeros();
    let mid_h = p.shoulder_offset + 0.5 * p.humerus_length;
    let mid_r = p.shoulder_offset + p.humerus_length + 0.5 * p.radius_length;
    [
        (p.body_mass, MovingPoint { r: z, v: z, a: z }),
        (p.proximal_mass, wing_point(p, gait, 1.0, mid_h).0),
        (p.proximal_mass, wing_point(p, gait, -1.0, mid_h).0),
        (p.distal_mass, wing_point(p, gait, 1.0, mid_r).0),
        (p.distal_mass, wing_point(p, gait, -1.0, mid_r).0),
    ]
}

/// One wing strip in the Aerobat frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripKinematics {
    pub point: MovingPoint,
    pub chord_axis: Vector3<f64>,
    pub normal: Vector3<f64>,
}

pub fn strip_kinematics(
    p: &AerobatParams,
    geometry: &WingGeometry,
    gait: &GaitSample,
    side: f64,
) -> Vec<StripKinematics> {
    geometry
        .strips
        .iter()
        .map(|s| {
            let (point, chord_axis, normal) = wing_point(p, gait, side, s.station);
            StripKinematics {
                point,
                chord_axis,
                normal,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AerobatState {
    /// Guard frame.
    pub position: Vector3<f64>,
    /// Relative roll, pitch, yaw.
    pub euler: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub euler_rates: Vector3<f64>,
}

impl Default for AerobatState {
    fn default() -> Self {
        Self {
            position: Vector3::zeros(),
            euler: Vector3::zeros(),
            velocity: Vector3::zeros(),
            euler_rates: Vector3::zeros(),
        }
    }
}

/// World-frame motion of the Aerobat reference frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AerobatFrame {
    pub position: Vector3<f64>,
    pub rotation: Matrix3<f64>,
    pub velocity: Vector3<f64>,
    pub angular_velocity: Vector3<f64>,
}

impl AerobatFrame {
    pub fn new(state: &AerobatState, guard: &GuardState) -> Self {
        let rg = guard.rotation();
        let wg = rg * guard.angular_velocity;
        let rho = rg * state.position;
        let rotation = rg * rotation_from_euler(&state.euler);
        let w_rel = rotation * euler_rate_matrix(&state.euler) * state.euler_rates;
        Self {
            position: guard.position + rho,
            rotation,
            velocity: guard.velocity + wg.cross(&rho) + rg * state.velocity,
            angular_velocity: wg + w_rel,
        }
    }

    /// World position and velocity of a moving body-frame point.
    pub fn point(&self, pt: &MovingPoint) -> (Vector3<f64>, Vector3<f64>) {
        let rho = self.rotation * pt.r;
        (
            self.position + rho,
            self.velocity + self.angular_velocity.cross(&rho) + self.rotation * pt.v,
        )
    }
}

fn body_inertia(p: &AerobatParams) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::from(p.body_inertia))
}

/// Kinetic energy of all lumped masses and the body's rotation.
pub fn kinetic_energy(
    p: &AerobatParams,
    state: &AerobatState,
    guard: &GuardState,
    gait: &GaitSample,
) -> f64 {
    let f = AerobatFrame::new(state, guard);
    let jw = f.rotation * body_inertia(p) * f.rotation.transpose();
    let mut ke = 0.5 * f.angular_velocity.dot(&(jw * f.angular_velocity));
    for (m, pt) in mass_points(p, gait) {
        let (_, v) = f.point(&pt);
        ke += 0.5 * m * v.norm_squared();
    }
    ke
}

/// Mass-weighted world position of the Aerobat's centre of mass.
pub fn center_of_mass(
    p: &AerobatParams,
    state: &AerobatState,
    guard: &GuardState,
    gait: &GaitSample,
) -> Vector3<f64> {
    let f = AerobatFrame::new(state, guard);
    mass_points(p, gait)
        .iter()
        .map(|(m, pt)| f.point(pt).0 * *m)
        .sum::<Vector3<f64>>()
        / p.mass()
}

pub fn linear_momentum(
    p: &AerobatParams,
    state: &AerobatState,
    guard: &GuardState,
    gait: &GaitSample,
) -> Vector3<f64> {
    let f = AerobatFrame::new(state, guard);
    mass_points(p, gait)
        .iter()
        .map(|(m, pt)| f.point(pt).1 * *m)
        .sum()
}

struct Composite {
    m6: Matrix6<f64>,
    bias: Vector6<f64>,
    first_moment: Vector3<f64>,
}

fn composite(p: &AerobatParams, frame: &AerobatFrame, gait: &GaitSample) -> Composite {
    let r = frame.rotation;
    let w = frame.angular_velocity;
    let jw = r * body_inertia(p) * r.transpose();
    let mut mass = 0.0;
    let mut s = Vector3::zeros();
    let mut theta = jw;
    let mut bf = Vector3::zeros();
    let mut bm = w.cross(&(jw * w));
    for (m, pt) in mass_points(p, gait) {
        let rho = r * pt.r;
        let acc = w.cross(&w.cross(&rho)) + w.cross(&(r * pt.v)) * 2.0 + r * pt.a;
        mass += m;
        s += rho * m;
        theta += (Matrix3::identity() * rho.norm_squared() - rho * rho.transpose()) * m;
        bf += acc * m;
        bm += rho.cross(&acc) * m;
    }
    let mut m6 = Matrix6::zeros();
    m6.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * mass));
    m6.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-skew(&s)));
    m6.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&s));
    m6.fixed_view_mut::<3, 3>(3, 3).copy_from(&theta);
    let mut bias = Vector6::zeros();
    bias.fixed_rows_mut::<3>(0).copy_from(&bf);
    bias.fixed_rows_mut::<3>(3).copy_from(&bm);
    Composite {
        m6,
        bias,
        first_moment: s,
    }
}

fn input_jacobian(state: &AerobatState, guard: &GuardState) -> Matrix6<f64> {
    let rg = guard.rotation();
    let ra = rg * rotation_from_euler(&state.euler);
    let mut j = Matrix6::zeros();
    j.fixed_view_mut::<3, 3>(0, 0).copy_from(&rg);
    j.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(ra * euler_rate_matrix(&state.euler)));
    j
}

/// Generalised inertia D_u of the relative coordinates (p_A, q_A).
pub fn generalized_inertia(
    p: &AerobatParams,
    state: &AerobatState,
    guard: &GuardState,
    gait: &GaitSample,
) -> Matrix6<f64> {
    let frame = AerobatFrame::new(state, guard);
    let c = composite(p, &frame, gait);
    let j = input_jacobian(state, guard);
    j.transpose() * c.m6 * j
}

/// Guard motion needed to express the Aerobat's relative accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardMotion<'a> {
    pub state: &'a GuardState,
    /// World frame.
    pub acceleration: Vector3<f64>,
    /// Body frame.
    pub angular_acceleration: Vector3<f64>,
}

/// Relative accelerations (p̈_A, q̈_A) under an external world-frame force and
/// moment about the Aerobat origin; gravity acts on every lumped mass.
pub fn aerobat_accelerations(
    p: &AerobatParams,
    state: &AerobatState,
    guard: &GuardMotion<'_>,
    gait: &GaitSample,
    force: &Vector3<f64>,
    moment: &Vector3<f64>,
    gravity: f64,
) -> Result<(Vector3<f64>, Vector3<f64>), DynamicsError> {
    let cp = state.euler.y.cos();
    if cp.abs() < 1e-6 {
        return Err(DynamicsError::SingularInertia(cp.abs()));
    }
    let g = guard.state;
    let rg = g.rotation();
    let wg = rg * g.angular_velocity;
    let alpha_g = rg * guard.angular_acceleration;
    let frame = AerobatFrame::new(state, g);
    let w_rel = frame.angular_velocity - wg;
    let rho = rg * state.position;
    let c_lin = guard.acceleration
        + alpha_g.cross(&rho)
        + wg.cross(&wg.cross(&rho))
        + wg.cross(&(rg * state.velocity)) * 2.0;
    let c_ang = alpha_g
        + wg.cross(&w_rel)
        + frame.rotation * euler_rate_bias(&state.euler, &state.euler_rates);
    let mut c = Vector6::zeros();
    c.fixed_rows_mut::<3>(0).copy_from(&c_lin);
    c.fixed_rows_mut::<3>(3).copy_from(&c_ang);

    let comp = composite(p, &frame, gait);
    let weight = Vector3::new(0.0, 0.0, -gravity * p.mass());
    let mut wrench = Vector6::zeros();
    wrench.fixed_rows_mut::<3>(0).copy_from(&(force + weight));
    wrench
        .fixed_rows_mut::<3>(3)
        .copy_from(&(moment + comp.first_moment.cross(&Vector3::new(0.0, 0.0, -gravity))));

    let j = input_jacobian(state, g);
    let du = j.transpose() * comp.m6 * j;
    let rhs = j.transpose() * (wrench - comp.bias - comp.m6 * c);
    let chol = du.cholesky().ok_or(DynamicsError::SingularInertia(0.0))?;
    let qdd = chol.solve(&rhs);
    Ok((
        qdd.fixed_rows::<3>(0).into_owned(),
        qdd.fixed_rows::<3>(3).into_owned(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::UnitQuaternion;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn default_mass_in_range() {
        let p = AerobatParams::default();
        p.validate().unwrap();
        assert!((0.040..=0.050).contains(&p.mass()));
        assert!((p.mass() - 0.045).abs() < 1e-15);
    }

    #[test]
    fn straight_level_wing_reaches_full_span() {
        let p = AerobatParams::default();
        let tip = wingtip(&p, &GaitSample::neutral(), 1.0);
        assert!((tip - Vector3::new(0.0, 0.15, 0.0)).norm() < 1e-15);
        let right = wingtip(&p, &GaitSample::neutral(), -1.0);
        assert!((right - Vector3::new(0.0, -0.15, 0.0)).norm() < 1e-15);
        // folded elbow pulls the tip aft
        let folded = wingtip(&p, &GaitSample::frozen(0.0, PI / 2.0), 1.0);
        assert!((folded - Vector3::new(-0.09, 0.06, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wing_point_derivatives_match_finite_difference() {
        let p = AerobatParams::default();
        let at = |t: f64| GaitSample {
            angle: [
                0.6 * (3.0 * t).sin() - 0.1,
                2.1 + 0.7 * (3.0 * t + 0.4).sin(),
            ],
            rate: [1.8 * (3.0 * t).cos(), 2.1 * (3.0 * t + 0.4).cos()],
            accel: [-5.4 * (3.0 * t).sin(), -6.3 * (3.0 * t + 0.4).sin()],
        };
        let h = 1e-5;
        for side in [1.0, -1.0] {
            for s in [0.03, 0.12] {
                let t = 0.37;
                let (c, ..) = wing_point(&p, &at(t), side, s);
                let (f, ..) = wing_point(&p, &at(t + h), side, s);
                let (b, ..) = wing_point(&p, &at(t - h), side, s);
                assert!(((f.r - b.r) / (2.0 * h) - c.v).norm() < 1e-7);
                assert!(((f.v - b.v) / (2.0 * h) - c.a).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn free_fall_keeps_relative_pose() {
        let p = AerobatParams::default();
        let guard = GuardState::default();
        let motion = GuardMotion {
            state: &guard,
            acceleration: Vector3::new(0.0, 0.0, -9.8),
            angular_acceleration: Vector3::zeros(),
        };
        let (pdd, qdd) = aerobat_accelerations(
            &p,
            &AerobatState::default(),
            &motion,
            &GaitSample::frozen(0.3, 2.0),
            &Vector3::zeros(),
            &Vector3::zeros(),
            9.8,
        )
        .unwrap();
        assert!(pdd.norm() < 1e-12 && qdd.norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn generalized_inertia_is_spd(
            x in -0.02f64..0.02, r in -0.5f64..0.5, pi in -0.5f64..0.5, y in -0.5f64..0.5,
            ts in -0.8f64..0.6, te in 1.3f64..2.9, gr in -0.5f64..0.5,
        ) {
            let p = AerobatParams::default();
            let state = AerobatState { position: Vector3::new(x, 0.0, -x), euler: Vector3::new(r, pi, y), ..Default::default() };
            let guard = GuardState { orientation: UnitQuaternion::from_euler_angles(gr, 0.1, -gr), ..Default::default() };
            let d = generalized_inertia(&p, &state, &guard, &GaitSample::frozen(ts, te));
            prop_assert!((d - d.transpose()).abs().max() < 1e-12);
            let eig = d.symmetric_eigen().eigenvalues;
            prop_assert!(eig.min() > 0.0);
        }
    }
}
