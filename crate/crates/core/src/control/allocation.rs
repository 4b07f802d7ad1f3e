//! Wrench (f, m_x, m_y, m_z) to six motor thrusts.
//!
//! Motors pair up as (1, 3) for pitch, (2, 4) for roll and (5, 6) for yaw. Each
//! pair k has a fixed difference d_k set by its moment and a free sum s_k; the
//! minimum-norm split gives every pair f/3, and bounds are met by shifting
//! sums uniformly inside each pair's feasible interval.

use nalgebra::Vector4;

use crate::dynamics::GuardParams;
use crate::error::ControlError;

/// (first, second) motor index of each pair and the moment sign convention
/// d = f_second − f_first.
const PAIRS: [(usize, usize); 3] = [(0, 2), (1, 3), (4, 5)];

/// Thrust map from the six motor forces to (f, m_x, m_y, m_z).
pub fn thrust_map(motors: &[f64; 6], p: &GuardParams) -> Vector4<f64> {
    Vector4::new(
        motors.iter().sum(),
        p.arm_x * (motors[3] - motors[1]),
        p.arm_y * (motors[2] - motors[0]),
        p.arm_z * (motors[5] - motors[4]),
    )
}

/// Outcome of a bounded allocation that always returns motor commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub motors: [f64; 6],
    pub achieved: Vector4<f64>,
    pub residual: Vector4<f64>,
}

impl Allocation {
    pub fn saturated(&self) -> bool {
        self.residual.norm() > 1e-9 * (1.0 + self.achieved.norm())
    }
}

/// Closest realizable allocation: pair moments are clipped first, then the
/// collective thrust, then the remaining thrust is shared as evenly as bounds allow.
pub fn allocate_saturating(wrench: &Vector4<f64>, p: &GuardParams, f_max: f64) -> Allocation {
    let d = [
        wrench[2] / p.arm_y,
        wrench[1] / p.arm_x,
        wrench[3] / p.arm_z,
    ]
    .map(|v| v.clamp(-f_max, f_max));
    let lo = d.map(f64::abs);
    let hi = d.map(|v| 2.0 * f_max - v.abs());
    let f = wrench[0].clamp(lo.iter().sum(), hi.iter().sum());
    let sums = |nu: f64| [0, 1, 2].map(|k| (f / 3.0 + nu).clamp(lo[k], hi[k]));
    // total of the clamped sums is nondecreasing in ν
    let (mut a, mut b) = (-2.0 * f_max - f, 2.0 * f_max + f);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if sums(mid).iter().sum::<f64>() < f {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut s = sums(0.5 * (a + b));
    // absorb the last rounding in a pair that has room
    let gap = f - s.iter().sum::<f64>();
    if let Some(k) = (0..3).find(|&k| s[k] + gap >= lo[k] && s[k] + gap <= hi[k]) {
        s[k] += gap;
    }
    let mut motors = [0.0; 6];
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        motors[i] = (0.5 * (s[k] - d[k])).clamp(0.0, f_max);
        motors[j] = (0.5 * (s[k] + d[k])).clamp(0.0, f_max);
    }
    let achieved = thrust_map(&motors, p);
    Allocation {
        motors,
        achieved,
        residual: wrench - achieved,
    }
}

/// Exact bounded allocation, or [`ControlError::InfeasibleWrench`] carrying the
/// closest achievable wrench.
pub fn allocate_motors(
    wrench: &Vector4<f64>,
    p: &GuardParams,
    f_max: f64,
) -> Result<[f64; 6], ControlError> {
    let a = allocate_saturating(wrench, p, f_max);
    if a.saturated() {
        return Err(ControlError::InfeasibleWrench {
            achievable: a.achieved.into(),
            command: a.motors,
            residual: a.residual.into(),
            residual_norm: a.residual.norm(),
        });
    }
    Ok(a.motors)
}
