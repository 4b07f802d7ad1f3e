//! Per-strip state-space realization of the unsteady circulation model.
//!
//! Unified state ξ = [a; Z] with Z = [z_{1,1}, z_{2,1}, z_{1,2}, …]:
//!
//! ```text
//! A ȧ = −B a + C Z + Φ₀ y′,     y′ = y1 + Y_Γ a
//! ż_{k,i} = −λ_{k,i} z_{k,i} + y′_i
//! β_i = Φ₀ y′_i + Σ_k κ_k λ_{k,i} z_{k,i}
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::geometry::WingGeometry;
use super::wagner::WagnerCoeffs;
use crate::error::AeroError;

/// Condition number above which the stacked circulation matrix is rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Lag-state magnitude treated as divergence.
const DIVERGENCE_BOUND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagRealization {
    /// ż = −λ z + y′.
    Standard,
    /// ż = −2λ z + (2 − e^{λt}) y′, with a divergence guard.
    TimeVarying,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AeroParams {
    pub half_span: f64,
    pub root_chord: f64,
    pub strip_count: usize,
    pub fourier_terms: usize,
    pub air_density: f64,
    pub drag_coefficient: f64,
    /// Speed used to nondimensionalise y1 and scale the Wagner time.
    pub reference_speed: f64,
    pub wagner: WagnerCoeffs,
    pub lag_realization: LagRealization,
}

impl Default for AeroParams {
    fn default() -> Self {
        Self {
            half_span: 0.15,
            root_chord: 0.08,
            strip_count: 8,
            fourier_terms: 8,
            air_density: 1.225,
            drag_coefficient: 0.02,
            reference_speed: 3.0,
            wagner: WagnerCoeffs::default(),
            lag_realization: LagRealization::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeroState {
    pub fourier_a: Vec<f64>,
    /// Two lag states per strip, strip-major.
    pub lag_states: Vec<f64>,
    pub time: f64,
}

impl AeroState {
    pub fn zeros(model: &AeroModel) -> Self {
        Self {
            fourier_a: vec![0.0; model.fourier_terms()],
            lag_states: vec![0.0; 2 * model.strip_count()],
            time: 0.0,
        }
    }

    pub fn xi(&self) -> Vec<f64> {
        self.fourier_a
            .iter()
            .chain(&self.lag_states)
            .copied()
            .collect()
    }

    pub fn from_xi(xi: &[f64], n: usize, time: f64) -> Self {
        Self {
            fourier_a: xi[..n].to_vec(),
            lag_states: xi[n..].to_vec(),
            time,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AeroModel {
    pub geometry: WingGeometry,
    pub wagner: WagnerCoeffs,
    pub air_density: f64,
    pub drag_coefficient: f64,
    pub reference_speed: f64,
    pub lag_realization: LagRealization,
    /// Rows [sin θ_i, …, sin nθ_i].
    pub a: DMatrix<f64>,
    /// A with row i divided by c_i.
    pub b: DMatrix<f64>,
    /// Rows [1, sin 2θ_i / sin θ_i, …].
    pub y_gamma: DMatrix<f64>,
    /// Per-strip lag rates λ_{k,i}.
    pub rates: Vec<[f64; 2]>,
    a_pinv: DMatrix<f64>,
    condition: f64,
}

impl AeroModel {
    pub fn new(params: &AeroParams) -> Result<Self, AeroError> {
        let geometry =
            WingGeometry::elliptic(params.half_span, params.root_chord, params.strip_count)?;
        Self::with_geometry(geometry, params)
    }

    pub fn with_geometry(geometry: WingGeometry, params: &AeroParams) -> Result<Self, AeroError> {
        geometry.validate()?;
        let n = params.fourier_terms;
        let m = geometry.strip_count();
        if n == 0 || m < n {
            return Err(AeroError::InvalidGeometry(format!(
                "{m} strips cannot determine {n} Fourier terms"
            )));
        }
        if !(params.reference_speed > 0.0
            && params.air_density > 0.0
            && params.drag_coefficient >= 0.0)
        {
            return Err(AeroError::InvalidGeometry(
                "reference speed and density must be positive".into(),
            ));
        }
        let thetas = geometry.thetas();
        let a = DMatrix::from_fn(m, n, |i, k| ((k + 1) as f64 * thetas[i]).sin());
        let b = DMatrix::from_fn(m, n, |i, k| a[(i, k)] / geometry.strips[i].chord);
        let y_gamma = DMatrix::from_fn(m, n, |i, k| a[(i, k)] / thetas[i].sin());

        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if !(condition <= MAX_CONDITION) {
            return Err(AeroError::SingularSystem(condition));
        }
        let a_pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|_| AeroError::SingularSystem(condition))?;
        let rates = geometry
            .strips
            .iter()
            .map(|s| params.wagner.rates(s.chord, params.reference_speed))
            .collect();
        Ok(Self {
            geometry,
            wagner: params.wagner,
            air_density: params.air_density,
            drag_coefficient: params.drag_coefficient,
            reference_speed: params.reference_speed,
            lag_realization: params.lag_realization,
            a,
            b,
            y_gamma,
            rates,
            a_pinv,
            condition,
        })
    }

    pub fn fourier_terms(&self) -> usize {
        self.a.ncols()
    }

    pub fn strip_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn state_dim(&self) -> usize {
        self.fourier_terms() + 2 * self.strip_count()
    }

    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Effective kinematics y′ = y1 + Y_Γ a.
    pub fn effective_input(&self, fourier_a: &[f64], y1: &[f64]) -> Vec<f64> {
        let a = DVector::from_column_slice(fourier_a);
        let yg = &self.y_gamma * a;
        y1.iter().zip(yg.iter()).map(|(u, g)| u + g).collect()
    }

    /// β_i = Φ₀ y′_i + C_i Z_i.
    pub fn beta(&self, xi: &[f64], y1: &[f64]) -> Vec<f64> {
        let n = self.fourier_terms();
        let yp = self.effective_input(&xi[..n], y1);
        let kappa = self.wagner.kappa();
        let phi0 = self.wagner.phi0();
        yp.iter()
            .enumerate()
            .map(|(i, y)| {
                let z = &xi[n + 2 * i..n + 2 * i + 2];
                let r = self.rates[i];
                phi0 * y + kappa[0] * r[0] * z[0] + kappa[1] * r[1] * z[1]
            })
            .collect()
    }

    /// ξ̇ at time `t` for strip inputs `y1`.
    pub fn derivative(&self, xi: &[f64], y1: &[f64], t: f64, out: &mut [f64]) {
        let n = self.fourier_terms();
        let m = self.strip_count();
        debug_assert_eq!(xi.len(), n + 2 * m);
        debug_assert_eq!(y1.len(), m);
        let a = DVector::from_column_slice(&xi[..n]);
        let yp = DVector::from_vec(self.effective_input(&xi[..n], y1));
        let beta = DVector::from_vec(self.beta(xi, y1));
        // A ȧ = β − B a
        let rhs = beta - &self.b * &a;
        let adot = &self.a_pinv * rhs;
        out[..n].copy_from_slice(adot.as_slice());
        for i in 0..m {
            for k in 0..2 {
                let lam = self.rates[i][k];
                let z = xi[n + 2 * i + k];
                out[n + 2 * i + k] = match self.lag_realization {
                    LagRealization::Standard => -lam * z + yp[i],
                    LagRealization::TimeVarying => -2.0 * lam * z + (2.0 - (lam * t).exp()) * yp[i],
                };
            }
        }
    }
}

/// Advances the aerodynamic state by one RK4 step with `y1` held over the step.
pub fn aero_step(
    state: &AeroState,
    model: &AeroModel,
    y1: &[f64],
    dt: f64,
) -> Result<AeroState, AeroError> {
    if !(dt > 0.0) {
        return Err(AeroError::InvalidGeometry(format!(
            "time step {dt} must be positive"
        )));
    }
    let dim = model.state_dim();
    let x0 = state.xi();
    let t0 = state.time;
    let mut k: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    model.derivative(&x0, y1, t0, &mut k[0]);
    for (stage, h) in [0.5, 0.5, 1.0].into_iter().enumerate() {
        for j in 0..dim {
            tmp[j] = x0[j] + h * dt * k[stage][j];
        }
        model.derivative(&tmp, y1, t0 + h * dt, &mut k[stage + 1]);
    }
    let x1: Vec<f64> = (0..dim)
        .map(|j| x0[j] + dt / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]))
        .collect();
    let t1 = t0 + dt;
    if x1
        .iter()
        .any(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND)
    {
        return Err(AeroError::Divergence { time: t1 });
    }
    Ok(AeroState::from_xi(&x1, model.fourier_terms(), t1))
}
