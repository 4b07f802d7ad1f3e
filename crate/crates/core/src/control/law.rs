//! Feedback-linearizing hover law: u = g₂⁻¹(u₀ − g₁ − g₃x̂₃) on the four
//! actuated axes (z, roll, pitch, yaw); lateral position is steered through
//! the commanded tilt.

use nalgebra::{Matrix4, Vector3, Vector4, Vector6};
use serde::{Deserialize, Serialize};

use super::observer::{wrap_angle, ObserverState, PlantModel};
use crate::error::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMode {
    /// PD on pose error and rates.
    #[default]
    Pd,
    /// Rate damping only: u₀ = −K x₂.
    VelocityOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlParams {
    pub observer_poles: [f64; 3],
    /// Multiplies all observer poles; mirrors tuning from model-term bounds.
    pub gain_inflation: f64,
    pub position_kp: f64,
    pub position_kd: f64,
    pub attitude_kp: f64,
    pub attitude_kd: f64,
    pub feedback: FeedbackMode,
    /// When false, x̂₃ is treated as zero in the control law.
    pub disturbance_cancellation: bool,
    /// Per-motor thrust limit, newtons.
    pub motor_limit: f64,
    /// Largest commanded roll or pitch, radians.
    pub max_tilt: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            observer_poles: [-15.0; 3],
            gain_inflation: 1.0,
            position_kp: 16.0,
            position_kd: 8.0,
            attitude_kp: 2500.0,
            attitude_kd: 100.0,
            feedback: FeedbackMode::Pd,
            disturbance_cancellation: true,
            motor_limit: 0.30,
            max_tilt: 0.5,
        }
    }
}

/// Hover setpoint: position and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setpoint {
    pub position: Vector3<f64>,
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    /// (f, m_x, m_y, m_z) in the guard body frame.
    pub wrench: Vector4<f64>,
    /// Commanded generalized acceleration u₀.
    pub u0: Vector6<f64>,
    /// Commanded roll and pitch.
    pub tilt: [f64; 2],
}

/// Rows of g₂ on the actuated axes; condition number guards the inversion.
fn actuated_map(model: &PlantModel, x1: &Vector6<f64>) -> Matrix4<f64> {
    let g2 = model.g2(x1);
    Matrix4::from_fn(|i, j| g2[(i + 2, j)])
}

pub fn control_law(
    obs: &ObserverState,
    setpoint: &Setpoint,
    params: &ControlParams,
    model: &PlantModel,
) -> Result<ControlOutput, ControlError> {
    let (x1, x2) = (obs.x1, obs.x2);
    let x3 = if params.disturbance_cancellation {
        obs.x3 * model.disturbance_gain
    } else {
        Vector6::zeros()
    };
    let pd = params.feedback == FeedbackMode::Pd;
    let kp_pos = if pd { params.position_kp } else { 0.0 };
    let kp_att = if pd { params.attitude_kp } else { 0.0 };

    let g1 = model.g1(&x1, &x2);
    let mut u0 = Vector6::zeros();
    for i in 0..3 {
        u0[i] = -kp_pos * (x1[i] - setpoint.position[i]) - params.position_kd * x2[i];
    }
    // translational demand: the thrust vector must supply u₀ − g₁ − x̂₃
    let a = u0.fixed_rows::<3>(0) - g1.fixed_rows::<3>(0) - x3.fixed_rows::<3>(0);
    let yaw = x1[5];
    let (sy, cy) = yaw.sin_cos();
    let norm = a.norm().max(1e-9);
    let n = Vector3::new(cy * a.x + sy * a.y, -sy * a.x + cy * a.y, a.z) / norm;
    let tilt = [
        (-n.y)
            .clamp(-1.0, 1.0)
            .asin()
            .clamp(-params.max_tilt, params.max_tilt),
        n.x.atan2(n.z).clamp(-params.max_tilt, params.max_tilt),
    ];
    if pd {
        let reference = [tilt[0], tilt[1], setpoint.yaw];
        for i in 0..3 {
            u0[3 + i] =
                -kp_att * wrap_angle(x1[3 + i] - reference[i]) - params.attitude_kd * x2[3 + i];
        }
    } else {
        for i in 3..6 {
            u0[i] = -params.attitude_kd * x2[i];
        }
    }

    let g = actuated_map(model, &x1);
    let svd = g.svd(false, false);
    let cond = svd.singular_values.max() / svd.singular_values.min();
    if !(cond <= 1e8) {
        return Err(ControlError::IllConditioned(cond));
    }
    let mut rhs = Vector4::zeros();
    for i in 0..4 {
        rhs[i] = u0[i + 2] - g1[i + 2] - x3[i + 2];
    }
    // thrust sized from the full translational demand projected on the body axis
    let wrench_att = g
        .lu()
        .solve(&rhs)
        .ok_or(ControlError::IllConditioned(f64::INFINITY))?;
    let b3 = model.g2(&x1).fixed_view::<3, 1>(0, 0) * model.mass;
    let thrust = (model.mass * a.dot(&b3)).max(0.0);
    let wrench = Vector4::new(thrust, wrench_att[1], wrench_att[2], wrench_att[3]);
    Ok(ControlOutput { wrench, u0, tilt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicsParams;
    use nalgebra::Matrix3;

    fn unit_model() -> PlantModel {
        PlantModel {
            mass: 1.0,
            inertia: Matrix3::identity(),
            gravity: 0.0,
            disturbance_gain: 1.0,
        }
    }

    #[test]
    fn hover_at_setpoint_commands_weight_only() {
        let model = PlantModel::from_params(&DynamicsParams::default());
        let sp = Setpoint {
            position: Vector3::zeros(),
            yaw: 0.0,
        };
        let out = control_law(
            &ObserverState::default(),
            &sp,
            &ControlParams::default(),
            &model,
        )
        .unwrap();
        assert!((out.wrench[0] - model.mass * model.gravity).abs() < 1e-14);
        assert!(out.wrench.fixed_rows::<3>(1).norm() < 1e-14);
        assert!(out.u0.norm() < 1e-14);
    }

    #[test]
    fn estimated_disturbance_is_cancelled() {
        let model = PlantModel::from_params(&DynamicsParams::default());
        let sp = Setpoint {
            position: Vector3::zeros(),
            yaw: 0.0,
        };
        let mut obs = ObserverState::default();
        obs.x3 = Vector6::new(0.0, 0.0, 0.5, 3.0, -2.0, 1.0);
        let out = control_law(&obs, &sp, &ControlParams::default(), &model).unwrap();
        let acc = model.acceleration(&obs.x1, &obs.x2, &out.wrench, &obs.x3);
        assert!(acc.norm() < 1e-12, "{acc:?}");
        let off = ControlParams {
            disturbance_cancellation: false,
            ..Default::default()
        };
        let out = control_law(&obs, &sp, &off, &model).unwrap();
        assert!(
            (model.acceleration(&obs.x1, &obs.x2, &out.wrench, &Vector6::zeros())).norm() < 1e-12
        );
    }

    #[test]
    fn velocity_only_mode_is_pure_damping() {
        let model = unit_model();
        let mut obs = ObserverState::default();
        obs.x1 = Vector6::new(0.0, 0.0, 0.3, 0.0, 0.0, 0.2);
        obs.x2 = Vector6::new(0.0, 0.0, 0.1, 0.2, -0.3, 0.4);
        let p = ControlParams {
            feedback: FeedbackMode::VelocityOnly,
            ..Default::default()
        };
        let out = control_law(
            &obs,
            &Setpoint {
                position: Vector3::zeros(),
                yaw: 0.0,
            },
            &p,
            &model,
        )
        .unwrap();
        assert!((out.u0 + obs.x2 * p.attitude_kd).fixed_rows::<3>(3).norm() < 1e-12);
        assert!((out.u0[2] + p.position_kd * 0.1).abs() < 1e-12);
    }

    #[test]
    fn near_vertical_pitch_is_ill_conditioned() {
        let mut obs = ObserverState::default();
        obs.x1[4] = std::f64::consts::FRAC_PI_2 - 1e-12;
        let r = control_law(
            &obs,
            &Setpoint {
                position: Vector3::zeros(),
                yaw: 0.0,
            },
            &ControlParams::default(),
            &unit_model(),
        );
        assert!(matches!(r, Err(ControlError::IllConditioned(_))));
    }

    #[test]
    fn lateral_error_tilts_towards_setpoint() {
        let model = PlantModel::from_params(&DynamicsParams::default());
        let mut obs = ObserverState::default();
        obs.x1[0] = -0.1;
        obs.x1[1] = -0.1;
        let out = control_law(
            &obs,
            &Setpoint {
                position: Vector3::zeros(),
                yaw: 0.0,
            },
            &ControlParams::default(),
            &model,
        )
        .unwrap();
        // +x needs positive pitch, +y needs negative roll
        assert!(out.tilt[1] > 0.0 && out.tilt[0] < 0.0);
    }
}
