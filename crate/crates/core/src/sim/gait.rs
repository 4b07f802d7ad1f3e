//! Periodic wing drive: joint angles from the linkage, resampled as a
//! truncated Fourier series in the flapping phase for smooth rates.

use std::f64::consts::TAU;

use crate::dynamics::GaitSample;
use crate::error::KinematicsError;
use crate::kinematics::{phase_grid, sweep, target_gait, LinkageDesign};

/// θ(φ) = c₀ + Σ_k a_k cos kφ + b_k sin kφ for both joints.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierGait {
    pub frequency: f64,
    /// Per joint [θ_s, θ_e]: mean, cosine and sine coefficients.
    pub mean: [f64; 2],
    pub cos: [Vec<f64>; 2],
    pub sin: [Vec<f64>; 2],
}

impl FourierGait {
    /// Fits `harmonics` harmonics to joint samples on a uniform phase grid.
    pub fn fit(samples: &[[f64; 2]], harmonics: usize, frequency: f64) -> Self {
        let n = samples.len();
        let mut mean = [0.0; 2];
        let mut cos = [vec![0.0; harmonics], vec![0.0; harmonics]];
        let mut sin = [vec![0.0; harmonics], vec![0.0; harmonics]];
        for j in 0..2 {
            mean[j] = samples.iter().map(|s| s[j]).sum::<f64>() / n as f64;
            for k in 1..=harmonics {
                let (mut a, mut b) = (0.0, 0.0);
                for (i, s) in samples.iter().enumerate() {
                    let phi = TAU * i as f64 / n as f64;
                    a += s[j] * (k as f64 * phi).cos();
                    b += s[j] * (k as f64 * phi).sin();
                }
                cos[j][k - 1] = 2.0 * a / n as f64;
                sin[j][k - 1] = 2.0 * b / n as f64;
            }
        }
        Self {
            frequency,
            mean,
            cos,
            sin,
        }
    }

    /// Joint angles produced by the linkage over one crank revolution.
    pub fn from_design(
        design: &LinkageDesign,
        grid: usize,
        harmonics: usize,
        frequency: f64,
    ) -> Result<Self, KinematicsError> {
        let states = sweep(design, &phase_grid(grid))?;
        let samples: Vec<[f64; 2]> = states.iter().map(|s| [s.theta_s, s.theta_e]).collect();
        Ok(Self::fit(&samples, harmonics, frequency))
    }

    /// The reference gait itself.
    pub fn from_targets(grid: usize, harmonics: usize, frequency: f64) -> Self {
        let samples: Vec<[f64; 2]> = phase_grid(grid)
            .into_iter()
            .map(|p| {
                let t = target_gait(p);
                [t.theta_s_hat, t.theta_e_hat]
            })
            .collect();
        Self::fit(&samples, harmonics, frequency)
    }

    /// Angles and phase derivatives (dθ/dφ, d²θ/dφ²) at phase φ.
    pub fn at_phase(&self, phi: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let mut th = self.mean;
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for j in 0..2 {
            for (i, (a, b)) in self.cos[j].iter().zip(&self.sin[j]).enumerate() {
                let k = (i + 1) as f64;
                let (s, c) = (k * phi).sin_cos();
                th[j] += a * c + b * s;
                d1[j] += k * (b * c - a * s);
                d2[j] -= k * k * (a * c + b * s);
            }
        }
        (th, d1, d2)
    }

    /// Gait sample at time `t` with phase φ = 2π f t.
    pub fn sample(&self, t: f64) -> GaitSample {
        let w = TAU * self.frequency;
        let (angle, d1, d2) = self.at_phase(w * t);
        GaitSample {
            angle,
            rate: d1.map(|v| v * w),
            accel: d2.map(|v| v * w * w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_trigonometric_polynomial() {
        let f = |p: f64| {
            [
                0.3 + 0.2 * p.cos() - 0.1 * (3.0 * p).sin(),
                2.0 + 0.4 * (2.0 * p).cos(),
            ]
        };
        let samples: Vec<[f64; 2]> = phase_grid(64).into_iter().map(f).collect();
        let g = FourierGait::fit(&samples, 8, 8.0);
        for p in [0.1, 1.3, 4.0] {
            let (th, d1, _) = g.at_phase(p);
            assert!((th[0] - f(p)[0]).abs() < 1e-13 && (th[1] - f(p)[1]).abs() < 1e-13);
            let h = 1e-6;
            let fd = (f(p + h)[0] - f(p - h)[0]) / (2.0 * h);
            assert!((d1[0] - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn time_derivatives_scale_with_frequency() {
        let g = FourierGait::from_targets(256, 12, 8.0);
        let t = 0.0123;
        let h = 1e-7;
        let (a, b, c) = (g.sample(t - h), g.sample(t), g.sample(t + h));
        for j in 0..2 {
            assert!(
                ((c.angle[j] - a.angle[j]) / (2.0 * h) - b.rate[j]).abs()
                    < 1e-5 * b.rate[j].abs().max(1.0)
            );
            assert!(
                ((c.rate[j] - a.rate[j]) / (2.0 * h) - b.accel[j]).abs()
                    < 1e-4 * b.accel[j].abs().max(1.0)
            );
        }
    }

    #[test]
    fn linkage_gait_is_periodic() {
        let g = FourierGait::from_design(&LinkageDesign::default(), 256, 16, 8.0).unwrap();
        let (a, b) = (g.sample(0.01), g.sample(0.01 + 1.0 / 8.0));
        assert!((a.angle[0] - b.angle[0]).abs() < 1e-12 && (a.angle[1] - b.angle[1]).abs() < 1e-12);
    }
}
