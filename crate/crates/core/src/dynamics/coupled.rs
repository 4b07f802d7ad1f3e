//! Guard + suspended Aerobat + per-wing aerodynamic states as one ODE.
//!
//! Flat layout: guard (p 3, v 3, quaternion w,i,j,k 4, ω 3), Aerobat (p_A 3,
//! q_A 3, ṗ_A 3, q̇_A 3), then ξ for the left and right wings.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::aerobat::{
    aerobat_accelerations, kinetic_energy, linear_momentum, mass_points, strip_kinematics,
    AerobatFrame, AerobatParams, AerobatState, GaitSample, GuardMotion,
};
use super::rigid::{body_wrench, guard_derivatives, BodyWrench, GuardParams, GuardState};
use super::suspension::{
    band_damping_wrench, potential_energy, suspension_wrench, BodyMotion, Pose, SuspensionParams,
    SuspensionWrench,
};
use crate::aero::{
    aero_output, strip_inputs, AeroModel, AeroOutput, AeroParams, AeroState, StripFlow,
};
use crate::error::DynamicsError;

pub const GUARD_DIM: usize = 13;
pub const AEROBAT_DIM: usize = 12;
/// Left wing first.
pub const SIDES: [f64; 2] = [1.0, -1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsParams {
    pub guard: GuardParams,
    pub aerobat: AerobatParams,
    pub suspension: SuspensionParams,
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        self.guard.validate()?;
        self.aerobat.validate()?;
        self.suspension.validate()
    }

    pub fn total_mass(&self) -> f64 {
        self.guard.mass + self.aerobat.mass()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub time: f64,
    pub guard: GuardState,
    pub aerobat: AerobatState,
    pub aero: [AeroState; 2],
}

#[derive(Debug, Clone)]
pub struct CoupledModel {
    pub params: DynamicsParams,
    pub aero: AeroModel,
    /// When false the wings produce no aerodynamic force and their states are frozen.
    pub aero_enabled: bool,
}

/// Intermediate quantities of one derivative evaluation, for logging and control.
#[derive(Debug, Clone)]
pub struct CoupledOutputs {
    pub suspension: SuspensionWrench,
    pub guard_wrench: BodyWrench,
    pub aero: [AeroOutput; 2],
}

fn v3(x: &[f64]) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

impl CoupledModel {
    pub fn new(params: DynamicsParams, aero: &AeroParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        Ok(Self {
            params,
            aero: AeroModel::new(aero)?,
            aero_enabled: true,
        })
    }

    pub fn aero_dim(&self) -> usize {
        self.aero.state_dim()
    }

    pub fn state_dim(&self) -> usize {
        GUARD_DIM + AEROBAT_DIM + 2 * self.aero_dim()
    }

    pub fn initial_state(&self, guard: GuardState, aerobat: AerobatState) -> CoupledState {
        let a = AeroState::zeros(&self.aero);
        CoupledState {
            time: 0.0,
            guard,
            aerobat,
            aero: [a.clone(), a],
        }
    }

    pub fn pack(&self, s: &CoupledState) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.state_dim());
        x.extend(s.guard.pack());
        let a = &s.aerobat;
        x.extend(a.position.iter());
        x.extend(a.euler.iter());
        x.extend(a.velocity.iter());
        x.extend(a.euler_rates.iter());
        for w in &s.aero {
            x.extend(w.xi());
        }
        x
    }

    pub fn unpack(&self, x: &[f64], time: f64) -> CoupledState {
        let guard = GuardState::unpack(x);
        let o = GUARD_DIM;
        let aerobat = AerobatState {
            position: v3(&x[o..o + 3]),
            euler: v3(&x[o + 3..o + 6]),
            velocity: v3(&x[o + 6..o + 9]),
            euler_rates: v3(&x[o + 9..o + 12]),
        };
        let n = self.aero.fourier_terms();
        let d = self.aero_dim();
        let base = GUARD_DIM + AEROBAT_DIM;
        let aero =
            [0, 1].map(|k| AeroState::from_xi(&x[base + k * d..base + (k + 1) * d], n, time));
        CoupledState {
            time,
            guard,
            aerobat,
            aero,
        }
    }

    /// Strip flows of one wing, positions relative to the Aerobat origin, world frame.
    pub fn strip_flows(
        &self,
        frame: &AerobatFrame,
        gait: &GaitSample,
        side: f64,
    ) -> Vec<StripFlow> {
        strip_kinematics(&self.params.aerobat, &self.aero.geometry, gait, side)
            .iter()
            .map(|k| {
                let (x, v) = frame.point(&k.point);
                StripFlow {
                    position: x - frame.position,
                    chord_axis: frame.rotation * k.chord_axis,
                    normal: frame.rotation * k.normal,
                    velocity: -v,
                }
            })
            .collect()
    }

    /// Writes ẋ into `out` and returns the intermediate wrenches.
    pub fn derivatives(
        &self,
        x: &[f64],
        time: f64,
        motors: &[f64; 6],
        gait: &GaitSample,
        out: &mut [f64],
    ) -> Result<CoupledOutputs, DynamicsError> {
        let s = self.unpack(x, time);
        let p = &self.params;
        let rg = s.guard.rotation();
        let frame = AerobatFrame::new(&s.aerobat, &s.guard);

        let guard_pose = Pose {
            position: s.guard.position,
            rotation: rg,
        };
        let aerobat_pose = Pose {
            position: frame.position,
            rotation: frame.rotation,
        };
        let mut susp = suspension_wrench(&guard_pose, &aerobat_pose, &p.suspension);
        if p.suspension.damping > 0.0 {
            let damp = band_damping_wrench(
                &BodyMotion {
                    pose: guard_pose,
                    velocity: s.guard.velocity,
                    angular_velocity: rg * s.guard.angular_velocity,
                },
                &BodyMotion {
                    pose: aerobat_pose,
                    velocity: frame.velocity,
                    angular_velocity: frame.angular_velocity,
                },
                &p.suspension,
            );
            susp.guard_force += damp.guard_force;
            susp.guard_moment_body += damp.guard_moment_body;
            susp.aerobat_force += damp.aerobat_force;
            susp.aerobat_moment += damp.aerobat_moment;
            susp.tensions
                .iter_mut()
                .zip(&damp.tensions)
                .for_each(|(t, d)| *t += d);
        }
        let wrench = body_wrench(
            motors,
            &(rg.transpose() * susp.guard_force),
            &susp.guard_moment_body,
            &p.guard,
        );
        let gd = guard_derivatives(&s.guard, &wrench, &p.guard);
        out[..GUARD_DIM].copy_from_slice(&gd.pack());

        let d = self.aero_dim();
        let base = GUARD_DIM + AEROBAT_DIM;
        let mut force = susp.aerobat_force;
        let mut moment = susp.aerobat_moment;
        let m = self.aero.strip_count();
        let mut aero = [AeroOutput::zero(m), AeroOutput::zero(m)];
        for (k, side) in SIDES.iter().enumerate() {
            let slot = &mut out[base + k * d..base + (k + 1) * d];
            if !self.aero_enabled {
                slot.iter_mut().for_each(|v| *v = 0.0);
                continue;
            }
            let flows = self.strip_flows(&frame, gait, *side);
            let y1 = strip_inputs(&flows, self.aero.reference_speed);
            self.aero
                .derivative(&x[base + k * d..base + (k + 1) * d], &y1, time, slot);
            let o = aero_output(&s.aero[k], &self.aero, &flows);
            force += o.total_force;
            moment += o.total_moment;
            aero[k] = o;
        }

        let motion = GuardMotion {
            state: &s.guard,
            acceleration: gd.acceleration,
            angular_acceleration: gd.angular_acceleration,
        };
        let (pdd, qdd) = aerobat_accelerations(
            &p.aerobat,
            &s.aerobat,
            &motion,
            gait,
            &force,
            &moment,
            p.guard.gravity,
        )?;
        let o = GUARD_DIM;
        out[o..o + 3].copy_from_slice(s.aerobat.velocity.as_slice());
        out[o + 3..o + 6].copy_from_slice(s.aerobat.euler_rates.as_slice());
        out[o + 6..o + 9].copy_from_slice(pdd.as_slice());
        out[o + 9..o + 12].copy_from_slice(qdd.as_slice());

        Ok(CoupledOutputs {
            suspension: susp,
            guard_wrench: wrench,
            aero,
        })
    }

    /// Kinetic + band + gravitational energy (gravity on every lumped mass).
    pub fn total_energy(&self, s: &CoupledState, gait: &GaitSample) -> f64 {
        let p = &self.params;
        let g = p.guard.gravity;
        let j = p.guard.inertia_matrix();
        let w = s.guard.angular_velocity;
        let guard_ke = 0.5 * p.guard.mass * s.guard.velocity.norm_squared() + 0.5 * w.dot(&(j * w));
        let frame = AerobatFrame::new(&s.aerobat, &s.guard);
        let aerobat_ke = kinetic_energy(&p.aerobat, &s.aerobat, &s.guard, gait);
        let bands = potential_energy(
            &Pose {
                position: s.guard.position,
                rotation: s.guard.rotation(),
            },
            &Pose {
                position: frame.position,
                rotation: frame.rotation,
            },
            &p.suspension,
            0.0,
            g,
        );
        let heights: f64 = mass_points(&p.aerobat, gait)
            .iter()
            .map(|(m, pt)| m * frame.point(pt).0.z)
            .sum();
        guard_ke + aerobat_ke + bands + g * (p.guard.mass * s.guard.position.z + heights)
    }

    pub fn linear_momentum(&self, s: &CoupledState, gait: &GaitSample) -> Vector3<f64> {
        s.guard.velocity * self.params.guard.mass
            + linear_momentum(&self.params.aerobat, &s.aerobat, &s.guard, gait)
    }

    /// Relative Aerobat pose at which bands balance its weight with the guard
    /// held at `guard`, found by Newton iteration on the net force and moment.
    pub fn static_equilibrium(
        &self,
        guard: &GuardState,
        gait: &GaitSample,
    ) -> Result<AerobatState, DynamicsError> {
        let p = &self.params;
        let residual = |q: &Vector6<f64>| -> Vector6<f64> {
            let state = AerobatState {
                position: q.fixed_rows::<3>(0).into_owned(),
                euler: q.fixed_rows::<3>(3).into_owned(),
                ..Default::default()
            };
            let frame = AerobatFrame::new(&state, guard);
            let susp = suspension_wrench(
                &Pose {
                    position: guard.position,
                    rotation: guard.rotation(),
                },
                &Pose {
                    position: frame.position,
                    rotation: frame.rotation,
                },
                &p.suspension,
            );
            let gvec = Vector3::new(0.0, 0.0, -p.guard.gravity);
            let mut f = susp.aerobat_force;
            let mut m = susp.aerobat_moment;
            for (mass, pt) in mass_points(&p.aerobat, gait) {
                f += gvec * mass;
                m += (frame.rotation * pt.r).cross(&(gvec * mass));
            }
            let mut r = Vector6::zeros();
            r.fixed_rows_mut::<3>(0).copy_from(&f);
            r.fixed_rows_mut::<3>(3).copy_from(&m);
            r
        };
        let mut q = Vector6::zeros();
        for _ in 0..50 {
            let r = residual(&q);
            if r.norm() < 1e-13 {
                break;
            }
            let mut jac = nalgebra::Matrix6::zeros();
            for i in 0..6 {
                let h = 1e-7;
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                jac.set_column(i, &((residual(&qp) - residual(&qm)) / (2.0 * h)));
            }
            let step = jac
                .lu()
                .solve(&r)
                .ok_or(DynamicsError::SingularInertia(0.0))?;
            q -= step;
        }
        Ok(AerobatState {
            position: q.fixed_rows::<3>(0).into_owned(),
            euler: q.fixed_rows::<3>(3).into_owned(),
            ..Default::default()
        })
    }
}

/// Hover thrust split equally over the six motors.
pub fn hover_motors(params: &DynamicsParams) -> [f64; 6] {
    [params.total_mass() * params.guard.gravity / 6.0; 6]
}

/// Rotation of the guard expressed as a matrix, for callers holding only the flat state.
pub fn guard_rotation(x: &[f64]) -> Matrix3<f64> {
    *UnitQuaternion::from_quaternion(Quaternion::new(x[6], x[7], x[8], x[9]))
        .to_rotation_matrix()
        .matrix()
}
