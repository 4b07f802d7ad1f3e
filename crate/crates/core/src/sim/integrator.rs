//! Fixed-step integrators over flat state vectors.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Rk4,
    /// Velocity-like components first, then position-like ones from the updated state.
    SemiImplicitEuler,
}

impl std::str::FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Self::Rk4),
            "semi-implicit-euler" => Ok(Self::SemiImplicitEuler),
            other => Err(format!(
                "unknown integrator '{other}' (expected rk4 or semi-implicit-euler)"
            )),
        }
    }
}

/// Reusable stage buffers for one state dimension.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub method: Integrator,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Stepper {
    pub fn new(method: Integrator, dim: usize) -> Self {
        Self {
            method,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `x` from `t` to `t + dt`.
    ///
    /// `position_mask[i]` marks components integrated with the updated
    /// derivative in semi-implicit Euler; RK4 ignores it.
    pub fn step<E>(
        &mut self,
        mut f: impl FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
        t: f64,
        x: &mut [f64],
        dt: f64,
        position_mask: &[bool],
    ) -> Result<(), E> {
        let n = x.len();
        match self.method {
            Integrator::Rk4 => {
                f(t, x, &mut self.k[0])?;
                for (stage, h) in [0.5, 0.5, 1.0].into_iter().enumerate() {
                    let (done, rest) = self.k.split_at_mut(stage + 1);
                    for j in 0..n {
                        self.tmp[j] = x[j] + h * dt * done[stage][j];
                    }
                    f(t + h * dt, &self.tmp, &mut rest[0])?;
                }
                let [k1, k2, k3, k4] = &self.k;
                for j in 0..n {
                    x[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                }
            }
            Integrator::SemiImplicitEuler => {
                f(t, x, &mut self.k[0])?;
                for j in 0..n {
                    if !position_mask[j] {
                        x[j] += dt * self.k[0][j];
                    }
                }
                f(t, x, &mut self.k[1])?;
                for j in 0..n {
                    if position_mask[j] {
                        x[j] += dt * self.k[1][j];
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn oscillator(w: f64) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<(), Infallible> {
        move |_, x, dx| {
            dx[0] = x[1];
            dx[1] = -w * w * x[0];
            Ok(())
        }
    }

    fn run(method: Integrator, dt: f64, steps: usize, w: f64) -> [f64; 2] {
        let mut s = Stepper::new(method, 2);
        let mut x = [1.0, 0.0];
        let mut f = oscillator(w);
        for i in 0..steps {
            s.step(&mut f, i as f64 * dt, &mut x, dt, &[true, false])
                .unwrap();
        }
        x
    }

    #[test]
    fn ballistic_fall_is_exact() {
        let g = 9.8;
        let mut s = Stepper::new(Integrator::Rk4, 2);
        let mut x = [0.0, 0.0];
        let mut f = |_: f64, x: &[f64], dx: &mut [f64]| -> Result<(), Infallible> {
            dx[0] = x[1];
            dx[1] = -g;
            Ok(())
        };
        for i in 0..1000 {
            s.step(&mut f, i as f64 * 1e-3, &mut x, 1e-3, &[true, false])
                .unwrap();
        }
        assert!((x[0] + 0.5 * g).abs() < 1e-10);
    }

    #[test]
    fn oscillator_amplitude_holds_over_100_cycles() {
        // 45 N/m band on a 45 g mass
        let w = (45.0f64 / 0.045).sqrt();
        let period = std::f64::consts::TAU / w;
        let dt = 1e-3;
        let steps = (100.0 * period / dt).round() as usize;
        let x = run(Integrator::Rk4, dt, steps, w);
        let amp = (x[0] * x[0] + (x[1] / w).powi(2)).sqrt();
        assert!((amp - 1.0).abs() <= 1e-4, "amplitude {amp}");
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let w = 10.0;
        let t_end = 2.0;
        let err = |n: usize| {
            let x = run(Integrator::Rk4, t_end / n as f64, n, w);
            ((x[0] - (w * t_end).cos()).powi(2) + (x[1] + w * (w * t_end).sin()).powi(2)).sqrt()
        };
        let ratio = err(500) / err(1000);
        assert!((8.0..=32.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn semi_implicit_euler_keeps_energy_bounded() {
        let w = 10.0;
        let x = run(Integrator::SemiImplicitEuler, 1e-3, 100_000, w);
        let e = x[0] * x[0] + (x[1] / w).powi(2);
        assert!((e - 1.0).abs() < 0.02);
    }

    #[test]
    fn parse_names() {
        assert_eq!("rk4".parse::<Integrator>().unwrap(), Integrator::Rk4);
        assert_eq!(
            "semi-implicit-euler".parse::<Integrator>().unwrap(),
            Integrator::SemiImplicitEuler
        );
        assert!("euler".parse::<Integrator>().is_err());
    }
}
