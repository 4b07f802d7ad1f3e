//! Two-term exponential indicial response and its Duhamel convolution.
//!
//! Scaled time is semichord-normalised: τ = 2 U_ref t / c, so term k decays in
//! physical time at λ_k = 2 ε_k U_ref / c.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WagnerMode {
    /// Φ(τ) = 1 − Σ ψ_k e^{−ε_k τ}: rises from 1 − Σψ towards 1.
    Classical,
    /// Φ(τ) = Σ ψ_k e^{−ε_k τ}: decays from Σψ to zero.
    PaperLiteral,
}

impl std::str::FromStr for WagnerMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classical" => Ok(Self::Classical),
            "paper-literal" => Ok(Self::PaperLiteral),
            other => Err(format!(
                "unknown aero mode '{other}' (expected classical or paper-literal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WagnerCoeffs {
    pub psi: [f64; 2],
    pub eps: [f64; 2],
    pub mode: WagnerMode,
}

impl Default for WagnerCoeffs {
    fn default() -> Self {
        Self {
            psi: [0.165, 0.335],
            eps: [0.0455, 0.300],
            mode: WagnerMode::Classical,
        }
    }
}

impl WagnerCoeffs {
    pub fn phi0(&self) -> f64 {
        let s = self.psi[0] + self.psi[1];
        match self.mode {
            WagnerMode::Classical => 1.0 - s,
            WagnerMode::PaperLiteral => s,
        }
    }

    pub fn phi_inf(&self) -> f64 {
        match self.mode {
            WagnerMode::Classical => 1.0,
            WagnerMode::PaperLiteral => 0.0,
        }
    }

    /// Weight of lag state k in β: Φ'(t) = Σ κ_k λ_k e^{−λ_k t}.
    pub fn kappa(&self) -> [f64; 2] {
        match self.mode {
            WagnerMode::Classical => self.psi,
            WagnerMode::PaperLiteral => [-self.psi[0], -self.psi[1]],
        }
    }

    /// Physical decay rates for a strip of chord `c` at reference speed `u_ref`.
    pub fn rates(&self, chord: f64, u_ref: f64) -> [f64; 2] {
        [
            2.0 * self.eps[0] * u_ref / chord,
            2.0 * self.eps[1] * u_ref / chord,
        ]
    }

    /// Φ as a function of physical time.
    pub fn phi(&self, t: f64, rates: [f64; 2]) -> f64 {
        let sum = self.psi[0] * (-rates[0] * t).exp() + self.psi[1] * (-rates[1] * t).exp();
        match self.mode {
            WagnerMode::Classical => 1.0 - sum,
            WagnerMode::PaperLiteral => sum,
        }
    }

    /// dΦ/dt in physical time.
    pub fn dphi(&self, t: f64, rates: [f64; 2]) -> f64 {
        let k = self.kappa();
        k[0] * rates[0] * (-rates[0] * t).exp() + k[1] * rates[1] * (-rates[1] * t).exp()
    }
}

/// Direct Duhamel convolution β(t_j) = Φ₀ y′(t_j) + ∫₀^{t_j} Φ′(t_j − τ) y′(τ) dτ,
/// trapezoidal in τ over a history sampled every `dt` from t = 0.
///
/// Validation reference for the state-space realization; O(N²).
pub fn wagner_response_oracle(
    y_prime: &[f64],
    dt: f64,
    coeffs: &WagnerCoeffs,
    rates: [f64; 2],
) -> Vec<f64> {
    let phi0 = coeffs.phi0();
    let kernel: Vec<f64> = (0..y_prime.len())
        .map(|j| coeffs.dphi(j as f64 * dt, rates))
        .collect();
    (0..y_prime.len())
        .map(|j| {
            let mut integral = 0.0;
            if j > 0 {
                integral = 0.5 * (kernel[j] * y_prime[0] + kernel[0] * y_prime[j]);
                for i in 1..j {
                    integral += kernel[j - i] * y_prime[i];
                }
                integral *= dt;
            }
            phi0 * y_prime[j] + integral
        })
        .collect()
}
