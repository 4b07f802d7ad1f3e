//! Extended-state observer on the guard pose chain
//! ẋ₁ = x₂, ẋ₂ = g₁ + g₂u + g₃x₃, with x₃ the lumped disturbance.
//!
//! Coordinates: x₁ = (p_G world, Z-Y-X Euler angles), x₂ = ẋ₁, u = (f, m_x, m_y, m_z).

use nalgebra::{Matrix3, Matrix6x4, Vector3, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use crate::dynamics::{euler_rate_bias, euler_rate_matrix, rotation_from_euler, DynamicsParams};
use crate::error::ControlError;

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
    if w == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        w
    }
}

/// x₁ − y with the attitude components wrapped.
pub fn pose_error(x1: &Vector6<f64>, y: &Vector6<f64>) -> Vector6<f64> {
    let mut e = x1 - y;
    for i in 3..6 {
        e[i] = wrap_angle(e[i]);
    }
    e
}

/// Nominal model terms g₁, g₂ of the guard pose chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantModel {
    /// Mass that collective thrust accelerates; defaults to guard plus Aerobat.
    pub mass: f64,
    pub inertia: Matrix3<f64>,
    pub gravity: f64,
    /// Constant disturbance input gain g₃ (per axis).
    pub disturbance_gain: f64,
}

impl PlantModel {
    /// Input map of the guard alone; the band reaction of the suspended
    /// Aerobat, its weight included, is left to the disturbance estimate.
    pub fn from_params(p: &DynamicsParams) -> Self {
        Self {
            mass: p.guard.mass,
            inertia: p.guard.inertia_matrix(),
            gravity: p.guard.gravity,
            disturbance_gain: 1.0,
        }
    }

    /// Drift g₁(x₁, x₂): gravity, gyroscopic and Euler-rate terms.
    pub fn g1(&self, x1: &Vector6<f64>, x2: &Vector6<f64>) -> Vector6<f64> {
        let e = x1.fixed_rows::<3>(3).into_owned();
        let de = x2.fixed_rows::<3>(3).into_owned();
        let em = euler_rate_matrix(&e);
        let w = em * de;
        let jinv = self.inertia.try_inverse().unwrap_or_else(Matrix3::zeros);
        let ang = em.try_inverse().unwrap_or_else(Matrix3::zeros)
            * (-(jinv * w.cross(&(self.inertia * w))) - euler_rate_bias(&e, &de));
        let mut g = Vector6::zeros();
        g[2] = -self.gravity;
        g.fixed_rows_mut::<3>(3).copy_from(&ang);
        g
    }

    /// Input map g₂(x₁): thrust along the body z axis and moments through J⁻¹.
    pub fn g2(&self, x1: &Vector6<f64>) -> Matrix6x4<f64> {
        let e = x1.fixed_rows::<3>(3).into_owned();
        let b3 = rotation_from_euler(&e) * Vector3::z();
        let ang = euler_rate_matrix(&e)
            .try_inverse()
            .unwrap_or_else(Matrix3::zeros)
            * self.inertia.try_inverse().unwrap_or_else(Matrix3::zeros);
        let mut g = Matrix6x4::zeros();
        g.fixed_view_mut::<3, 1>(0, 0).copy_from(&(b3 / self.mass));
        g.fixed_view_mut::<3, 3>(3, 1).copy_from(&ang);
        g
    }

    pub fn acceleration(
        &self,
        x1: &Vector6<f64>,
        x2: &Vector6<f64>,
        u: &Vector4<f64>,
        x3: &Vector6<f64>,
    ) -> Vector6<f64> {
        self.g1(x1, x2) + self.g2(x1) * u + x3 * self.disturbance_gain
    }
}

/// Per-axis diagonal observer gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverGains {
    pub beta1: [f64; 6],
    pub beta2: [f64; 6],
    pub beta3: [f64; 6],
}

impl ObserverGains {
    /// Error-dynamics matrix of one axis for e = x̂ − x.
    pub fn error_matrix(&self, axis: usize, gamma: f64) -> Matrix3<f64> {
        Matrix3::new(
            -self.beta1[axis],
            1.0,
            0.0,
            -self.beta2[axis],
            0.0,
            gamma,
            -self.beta3[axis] * gamma,
            0.0,
            0.0,
        )
    }

    /// Multiplies every gain stage by the matching power of `factor`, which
    /// scales all observer poles by `factor`.
    pub fn inflated(&self, factor: f64) -> Self {
        Self {
            beta1: self.beta1.map(|b| b * factor),
            beta2: self.beta2.map(|b| b * factor * factor),
            beta3: self.beta3.map(|b| b * factor.powi(3)),
        }
    }
}

/// Gains placing the three error poles of every axis at `poles`.
///
/// The error polynomial is s³ + β₁s² + β₂s + γβ₃, matched to Π(s − λ_k).
pub fn place_observer_poles(poles: &[f64; 3], gamma: f64) -> Result<ObserverGains, ControlError> {
    if let Some(p) = poles.iter().find(|p| !(**p < 0.0)) {
        return Err(ControlError::UnstablePoleRequest(*p));
    }
    let [a, b, c] = *poles;
    let b1 = -(a + b + c);
    let b2 = a * b + b * c + a * c;
    let b3 = -(a * b * c) / gamma;
    Ok(ObserverGains {
        beta1: [b1; 6],
        beta2: [b2; 6],
        beta3: [b3; 6],
    })
}

/// Coefficients (c₂, c₁, c₀) of det(sI − A) for a 3×3 matrix.
pub fn characteristic_polynomial(a: &Matrix3<f64>) -> [f64; 3] {
    let tr = a.trace();
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    [-tr, minors, -a.determinant()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverState {
    pub x1: Vector6<f64>,
    pub x2: Vector6<f64>,
    pub x3: Vector6<f64>,
}

impl Default for ObserverState {
    fn default() -> Self {
        Self {
            x1: Vector6::zeros(),
            x2: Vector6::zeros(),
            x3: Vector6::zeros(),
        }
    }
}

impl ObserverState {
    /// Starts at a measured pose with zero rates and disturbance.
    pub fn at(x1: Vector6<f64>) -> Self {
        Self {
            x1,
            ..Default::default()
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn is_finite(&self) -> bool {
        self.x1
            .iter()
            .chain(self.x2.iter())
            .chain(self.x3.iter())
            .all(|v| v.is_finite())
    }
}

fn observer_rate(
    s: &ObserverState,
    y: &Vector6<f64>,
    u: &Vector4<f64>,
    model: &PlantModel,
    g: &ObserverGains,
) -> ObserverState {
    let e = pose_error(&s.x1, y);
    let b = |beta: &[f64; 6]| Vector6::from_fn(|i, _| beta[i] * e[i]);
    ObserverState {
        x1: s.x2 - b(&g.beta1),
        x2: model.acceleration(y, &s.x2, u, &s.x3) - b(&g.beta2),
        x3: -b(&g.beta3),
    }
}

/// One RK4 step of the observer with `u` held; `measurement(h)` returns the
/// measured pose at fraction h ∈ [0, 1] of the step.
pub fn observer_step_with(
    obs: &ObserverState,
    measurement: impl Fn(f64) -> Vector6<f64>,
    u: &Vector4<f64>,
    model: &PlantModel,
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    let add = |s: &ObserverState, k: &ObserverState, h: f64| ObserverState {
        x1: s.x1 + k.x1 * h,
        x2: s.x2 + k.x2 * h,
        x3: s.x3 + k.x3 * h,
    };
    let y_mid = measurement(0.5);
    let k1 = observer_rate(obs, &measurement(0.0), u, model, gains);
    let k2 = observer_rate(&add(obs, &k1, 0.5 * dt), &y_mid, u, model, gains);
    let k3 = observer_rate(&add(obs, &k2, 0.5 * dt), &y_mid, u, model, gains);
    let k4 = observer_rate(&add(obs, &k3, dt), &measurement(1.0), u, model, gains);
    let mut out = ObserverState {
        x1: obs.x1 + (k1.x1 + k2.x1 * 2.0 + k3.x1 * 2.0 + k4.x1) * (dt / 6.0),
        x2: obs.x2 + (k1.x2 + k2.x2 * 2.0 + k3.x2 * 2.0 + k4.x2) * (dt / 6.0),
        x3: obs.x3 + (k1.x3 + k2.x3 * 2.0 + k3.x3 * 2.0 + k4.x3) * (dt / 6.0),
    };
    for i in 3..6 {
        out.x1[i] = wrap_angle(out.x1[i]);
    }
    out
}

/// [`observer_step_with`] for measurements sampled at the step ends and
/// interpolated linearly (angles along the short arc).
pub fn observer_step(
    obs: &ObserverState,
    y_start: &Vector6<f64>,
    y_end: &Vector6<f64>,
    u: &Vector4<f64>,
    model: &PlantModel,
    gains: &ObserverGains,
    dt: f64,
) -> ObserverState {
    let dy = pose_error(y_end, y_start);
    observer_step_with(obs, |h| y_start + dy * h, u, model, gains, dt)
}
