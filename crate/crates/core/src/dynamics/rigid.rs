//! Guard rigid body: thrust map, Newton-Euler equations and attitude helpers.

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;

pub const GRAVITY: f64 = 9.8;

/// Z-Y-X Euler angles (roll, pitch, yaw) to rotation body → parent.
pub fn rotation_from_euler(e: &Vector3<f64>) -> Matrix3<f64> {
    *Rotation3::from_euler_angles(e.x, e.y, e.z).matrix()
}

pub fn euler_from_rotation(r: &Matrix3<f64>) -> Vector3<f64> {
    let (roll, pitch, yaw) = Rotation3::from_matrix_unchecked(*r).euler_angles();
    Vector3::new(roll, pitch, yaw)
}

/// Maps Z-Y-X Euler rates to body-frame angular velocity.
pub fn euler_rate_matrix(e: &Vector3<f64>) -> Matrix3<f64> {
    let (sr, cr) = e.x.sin_cos();
    let (sp, cp) = e.y.sin_cos();
    Matrix3::new(1.0, 0.0, -sp, 0.0, cr, sr * cp, 0.0, -sr, cr * cp)
}

/// Time derivative of [`euler_rate_matrix`] applied to the rates: Ė(e, ė) ė.
pub fn euler_rate_bias(e: &Vector3<f64>, de: &Vector3<f64>) -> Vector3<f64> {
    let (sr, cr) = e.x.sin_cos();
    let (sp, cp) = e.y.sin_cos();
    let (dr, dp, dy) = (de.x, de.y, de.z);
    Vector3::new(
        -cp * dp * dy,
        -sr * dr * dp + (cr * cp * dr - sr * sp * dp) * dy,
        -cr * dr * dp + (-sr * cp * dr - cr * sp * dp) * dy,
    )
}

pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Thin elliptic loop of linear density `rho` with semi-axes `a` along `u` and
/// `b` along `v`, integrated by the midpoint rule in the parametric angle.
fn loop_inertia(a: f64, b: f64, u: Vector3<f64>, v: Vector3<f64>, rho: f64) -> (f64, Matrix3<f64>) {
    let n = 2000;
    let mut mass = 0.0;
    let mut j = Matrix3::zeros();
    for k in 0..n {
        let t = (k as f64 + 0.5) * std::f64::consts::TAU / n as f64;
        let r = u * (a * t.cos()) + v * (b * t.sin());
        let ds = (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt() * std::f64::consts::TAU
            / n as f64;
        let dm = rho * ds;
        mass += dm;
        j += (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * dm;
    }
    (mass, j)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuardParams {
    pub mass: f64,
    /// Body-frame inertia, row-major.
    pub inertia: [[f64; 3]; 3],
    /// Roll arm: m_x = L_x (f4 − f2).
    pub arm_x: f64,
    /// Pitch arm: m_y = L_y (f3 − f1).
    pub arm_y: f64,
    /// Yaw arm: m_z = L_z (f6 − f5).
    pub arm_z: f64,
    pub gravity: f64,
}

impl GuardParams {
    /// Inertia of three carbon loops (two 4 × 0.4 m meridians, one 4 × 0.3 m
    /// equator) plus six motors and a central electronics mass, all summing to `mass`.
    pub fn estimated_inertia(mass: f64, arm_x: f64, arm_y: f64, arm_z: f64) -> [[f64; 3]; 3] {
        let rod_density = 0.004;
        let motor = 0.004;
        let (m1, j1) = loop_inertia(0.30, 0.20, Vector3::x(), Vector3::z(), rod_density);
        let (m2, j2) = loop_inertia(0.30, 0.20, Vector3::y(), Vector3::z(), rod_density);
        let (m3, j3) = loop_inertia(0.20, 0.18, Vector3::x(), Vector3::y(), rod_density);
        let mut j = j1 + j2 + j3;
        let motors = [
            Vector3::new(arm_y, 0.0, 0.0),
            Vector3::new(0.0, -arm_x, 0.0),
            Vector3::new(-arm_y, 0.0, 0.0),
            Vector3::new(0.0, arm_x, 0.0),
            Vector3::new(-arm_z, 0.0, 0.0),
            Vector3::new(arm_z, 0.0, 0.0),
        ];
        for r in &motors {
            j += (Matrix3::identity() * r.norm_squared() - r * r.transpose()) * motor;
        }
        // remaining mass sits at the centre and adds no inertia
        debug_assert!(mass > m1 + m2 + m3 + 6.0 * motor);
        j.transpose().into()
    }

    pub fn inertia_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.inertia.concat())
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.mass > 0.0
            && self.gravity >= 0.0
            && self.arm_x > 0.0
            && self.arm_y > 0.0
            && self.arm_z > 0.0)
        {
            return Err(DynamicsError::InvalidParams(
                "guard mass and arms must be positive".into(),
            ));
        }
        let j = self.inertia_matrix();
        if (j - j.transpose()).abs().max() > 1e-12 * j.abs().max() {
            return Err(DynamicsError::InvalidParams(
                "guard inertia is not symmetric".into(),
            ));
        }
        let eig = j.symmetric_eigen().eigenvalues;
        if eig.min() <= 0.0 {
            return Err(DynamicsError::SingularInertia(eig.min()));
        }
        Ok(())
    }
}

impl Default for GuardParams {
    fn default() -> Self {
        let (mass, ax, ay, az) = (0.060, 0.15, 0.15, 0.20);
        Self {
            mass,
            inertia: Self::estimated_inertia(mass, ax, ay, az),
            arm_x: ax,
            arm_y: ay,
            arm_z: az,
            gravity: GRAVITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// Body → world.
    pub orientation: UnitQuaternion<f64>,
    /// Body frame.
    pub angular_velocity: Vector3<f64>,
}

impl Default for GuardState {
    fn default() -> Self {
        Self {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
            angular_velocity: Vector3::zeros(),
        }
    }
}

impl GuardState {
    pub fn rotation(&self) -> Matrix3<f64> {
        *self.orientation.to_rotation_matrix().matrix()
    }

    pub fn euler(&self) -> Vector3<f64> {
        let (r, p, y) = self.orientation.euler_angles();
        Vector3::new(r, p, y)
    }

    pub fn from_euler(position: Vector3<f64>, euler: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: UnitQuaternion::from_euler_angles(euler.x, euler.y, euler.z),
            ..Default::default()
        }
    }

    /// Euler-angle rates corresponding to the body angular velocity.
    pub fn euler_rates(&self) -> Vector3<f64> {
        euler_rate_matrix(&self.euler())
            .try_inverse()
            .unwrap_or_else(Matrix3::zeros)
            * self.angular_velocity
    }

    /// Flat layout: p, v, quaternion (w, i, j, k), ω.
    pub fn pack(&self) -> [f64; 13] {
        let q = self.orientation.into_inner();
        let (p, v, w) = (self.position, self.velocity, self.angular_velocity);
        [
            p.x, p.y, p.z, v.x, v.y, v.z, q.w, q.i, q.j, q.k, w.x, w.y, w.z,
        ]
    }

    /// Inverse of [`GuardState::pack`]; the quaternion is normalized.
    pub fn unpack(x: &[f64]) -> Self {
        Self {
            position: Vector3::new(x[0], x[1], x[2]),
            velocity: Vector3::new(x[3], x[4], x[5]),
            orientation: UnitQuaternion::from_quaternion(Quaternion::new(x[6], x[7], x[8], x[9])),
            angular_velocity: Vector3::new(x[10], x[11], x[12]),
        }
    }
}

impl GuardDerivative {
    pub fn pack(&self) -> [f64; 13] {
        let (v, a, q, w) = (
            self.velocity,
            self.acceleration,
            self.orientation,
            self.angular_acceleration,
        );
        [
            v.x, v.y, v.z, a.x, a.y, a.z, q.w, q.i, q.j, q.k, w.x, w.y, w.z,
        ]
    }
}

/// Rescales the quaternion stored at `x[offset..offset + 4]` to unit norm.
pub fn normalize_quaternion(x: &mut [f64], offset: usize) {
    let q = &mut x[offset..offset + 4];
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        q.iter_mut().for_each(|v| *v /= n);
    }
}

/// Body-frame force and moment acting on the guard.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

/// Collective thrust along body z plus the suspension wrench (body frame).
///
/// The thrust part follows f = Σf_i, m_x = L_x(f4 − f2), m_y = L_y(f3 − f1),
/// m_z = L_z(f6 − f5). Lateral suspension force components are kept.
pub fn body_wrench(
    motors: &[f64; 6],
    suspension_force: &Vector3<f64>,
    suspension_moment: &Vector3<f64>,
    p: &GuardParams,
) -> BodyWrench {
    let f: f64 = motors.iter().sum();
    BodyWrench {
        force: Vector3::new(0.0, 0.0, f) + suspension_force,
        moment: Vector3::new(
            p.arm_x * (motors[3] - motors[1]),
            p.arm_y * (motors[2] - motors[0]),
            p.arm_z * (motors[5] - motors[4]),
        ) + suspension_moment,
    }
}

/// Time derivative of the guard state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardDerivative {
    pub velocity: Vector3<f64>,
    pub acceleration: Vector3<f64>,
    pub orientation: Quaternion<f64>,
    pub angular_acceleration: Vector3<f64>,
}

pub fn guard_derivatives(
    state: &GuardState,
    wrench: &BodyWrench,
    p: &GuardParams,
) -> GuardDerivative {
    let j = p.inertia_matrix();
    let w = state.angular_velocity;
    let force_world = state.orientation * wrench.force;
    let acceleration = Vector3::new(0.0, 0.0, -p.gravity) + force_world / p.mass;
    let jw = j * w;
    let angular_acceleration =
        j.try_inverse().expect("validated inertia") * (wrench.moment - w.cross(&jw));
    let q = state.orientation.into_inner();
    let orientation = q * Quaternion::new(0.0, w.x, w.y, w.z) * 0.5;
    GuardDerivative {
        velocity: state.velocity,
        acceleration,
        orientation,
        angular_acceleration,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn default_guard_inertia_is_spd() {
        let p = GuardParams::default();
        p.validate().unwrap();
        let j = p.inertia_matrix();
        // loops in x-z and y-z make yaw the largest axis
        assert!(j[(2, 2)] > j[(0, 0)] && j[(2, 2)] > j[(1, 1)]);
    }

    #[test]
    fn thin_ring_matches_circle_formula() {
        let (m, j) = loop_inertia(0.2, 0.2, Vector3::x(), Vector3::y(), 0.01);
        let m_exact = 0.01 * std::f64::consts::TAU * 0.2;
        assert_abs_diff_eq!(m, m_exact, epsilon = 1e-12);
        assert_abs_diff_eq!(j[(2, 2)], m_exact * 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(j[(0, 0)], m_exact * 0.02, epsilon = 1e-12);
    }

    #[test]
    fn wrench_reference_cases() {
        let p = GuardParams {
            arm_x: 0.2,
            ..Default::default()
        };
        let z = Vector3::zeros();
        let w = body_wrench(&[0.0; 6], &z, &z, &p);
        assert_eq!(w, BodyWrench::default());
        let w = body_wrench(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], &z, &z, &p);
        assert_abs_diff_eq!(w.moment.x, 0.2, epsilon = 1e-15);
        let w = body_wrench(&[0.3, 0.1, 0.3, 0.1, 0.2, 0.2], &z, &z, &p);
        assert_eq!(w.moment, Vector3::zeros());
        assert_abs_diff_eq!(w.force.z, 1.2, epsilon = 1e-15);
    }

    #[test]
    fn hover_thrust_cancels_gravity() {
        let p = GuardParams::default();
        let mut m = [0.0; 6];
        m.iter_mut().for_each(|f| *f = p.mass * p.gravity / 6.0);
        let w = body_wrench(&m, &Vector3::zeros(), &Vector3::zeros(), &p);
        let d = guard_derivatives(&GuardState::default(), &w, &p);
        assert!(d.acceleration.norm() < 1e-14);
    }

    #[test]
    fn euler_rate_bias_matches_finite_difference() {
        let e = Vector3::new(0.3, -0.4, 1.1);
        let de = Vector3::new(0.7, -1.3, 0.4);
        let h = 1e-6;
        let fd =
            (euler_rate_matrix(&(e + de * h)) - euler_rate_matrix(&(e - de * h))) / (2.0 * h) * de;
        assert!((fd - euler_rate_bias(&e, &de)).norm() < 1e-8);
    }

    #[test]
    fn euler_roundtrip_and_rate_matrix() {
        let e = Vector3::new(0.2, -0.3, 2.0);
        let r = rotation_from_euler(&e);
        assert!((euler_from_rotation(&r) - e).norm() < 1e-12);
        // body rate from finite-differenced rotation: ω̂ = Rᵀ Ṙ
        let de = Vector3::new(0.5, 0.1, -0.8);
        let h = 1e-6;
        let rd =
            (rotation_from_euler(&(e + de * h)) - rotation_from_euler(&(e - de * h))) / (2.0 * h);
        let w = r.transpose() * rd;
        let omega = Vector3::new(w[(2, 1)], w[(0, 2)], w[(1, 0)]);
        assert!((omega - euler_rate_matrix(&e) * de).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn rotation_preserves_thrust_norm(r in -3.0f64..3.0, p in -1.5f64..1.5, y in -3.0f64..3.0, f in 0.0f64..5.0) {
            let s = GuardState::from_euler(Vector3::zeros(), Vector3::new(r, p, y));
            let world = s.orientation * Vector3::new(0.0, 0.0, f);
            prop_assert!((world.norm() - f).abs() <= 1e-12);
            let rot = s.rotation();
            prop_assert!((rot.transpose() * rot - Matrix3::identity()).abs().max() <= 1e-9);
        }
    }
}
