use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::model::{AeroModel, AeroState};

/// Kinematics of one strip, all vectors in a common frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripFlow {
    pub position: Vector3<f64>,
    /// Unit vector from trailing to leading edge.
    pub chord_axis: Vector3<f64>,
    /// Unit surface normal (lift-positive side).
    pub normal: Vector3<f64>,
    /// Air velocity relative to the strip.
    pub velocity: Vector3<f64>,
}

/// Per-strip kinematic input y1 split by source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripForcing {
    pub body: Vec<f64>,
    pub flapping: Vec<f64>,
}

impl StripForcing {
    /// Inputs from the strip velocities due to body motion and due to flapping
    /// (still air), projected on the strip normals and scaled by `u_ref`.
    pub fn from_velocities(
        normals: &[Vector3<f64>],
        body_velocity: &[Vector3<f64>],
        flapping_velocity: &[Vector3<f64>],
        u_ref: f64,
    ) -> Self {
        let project = |v: &[Vector3<f64>]| {
            normals
                .iter()
                .zip(v)
                .map(|(n, v)| -v.dot(n) / u_ref)
                .collect()
        };
        Self {
            body: project(body_velocity),
            flapping: project(flapping_velocity),
        }
    }

    pub fn y1(&self) -> Vec<f64> {
        self.body
            .iter()
            .zip(&self.flapping)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// y1_i = (U_i · n̂_i) / U_ref.
pub fn strip_inputs(flows: &[StripFlow], u_ref: f64) -> Vec<f64> {
    flows
        .iter()
        .map(|f| f.velocity.dot(&f.normal) / u_ref)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeroOutput {
    pub beta: Vec<f64>,
    pub strip_forces: Vec<Vector3<f64>>,
    pub total_force: Vector3<f64>,
    /// About the frame origin.
    pub total_moment: Vector3<f64>,
}

impl AeroOutput {
    pub fn zero(m: usize) -> Self {
        Self {
            beta: vec![0.0; m],
            strip_forces: vec![Vector3::zeros(); m],
            total_force: Vector3::zeros(),
            total_moment: Vector3::zeros(),
        }
    }
}

/// Lift and drag directions for a strip; `None` with no chordwise flow.
///
/// The spanwise flow component is discarded. Lift is normal to the remaining
/// flow within the chord-normal plane.
pub fn strip_directions(flow: &StripFlow) -> Option<(f64, Vector3<f64>, Vector3<f64>)> {
    let span = flow.chord_axis.cross(&flow.normal);
    let span = span.try_normalize(1e-15)?;
    let u = flow.velocity - span * flow.velocity.dot(&span);
    let speed = u.norm();
    if speed < 1e-12 {
        return None;
    }
    let lift =
        (flow.chord_axis * u.dot(&flow.normal) - flow.normal * u.dot(&flow.chord_axis)) / speed;
    Some((speed, lift, u / speed))
}

pub fn aero_output(state: &AeroState, model: &AeroModel, flows: &[StripFlow]) -> AeroOutput {
    let m = model.strip_count();
    assert_eq!(flows.len(), m, "one flow per strip");
    let y1 = strip_inputs(flows, model.reference_speed);
    let beta = model.beta(&state.xi(), &y1);
    let mut out = AeroOutput::zero(m);
    for (i, flow) in flows.iter().enumerate() {
        let Some((speed, lift, drag)) = strip_directions(flow) else {
            continue;
        };
        let strip = &model.geometry.strips[i];
        let q = 0.5 * model.air_density * speed * speed * strip.chord * strip.width;
        let f = (lift * beta[i] + drag * model.drag_coefficient) * q;
        out.strip_forces[i] = f;
        out.total_force += f;
        out.total_moment += flow.position.cross(&f);
    }
    out.beta = beta;
    out
}
