use serde::{Deserialize, Serialize};

use crate::error::AeroError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    /// Spanwise station from the wing root, meters.
    pub station: f64,
    pub chord: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WingGeometry {
    pub half_span: f64,
    pub strips: Vec<Strip>,
}

/// Spanwise angle θ = arccos(s / l).
pub fn strip_theta(s: f64, l: f64) -> Result<f64, AeroError> {
    if !(0.0..=l).contains(&s) || l <= 0.0 {
        return Err(AeroError::Domain {
            station: s,
            half_span: l,
        });
    }
    Ok((s / l).clamp(-1.0, 1.0).acos())
}

/// Γ(θ) = Σ a_k sin(kθ).
pub fn circulation(fourier_a: &[f64], theta: f64) -> f64 {
    fourier_a
        .iter()
        .enumerate()
        .map(|(k, a)| a * ((k + 1) as f64 * theta).sin())
        .sum()
}

impl WingGeometry {
    /// Elliptic planform split into `m` equal-width strips sampled at their midpoints.
    pub fn elliptic(half_span: f64, root_chord: f64, m: usize) -> Result<Self, AeroError> {
        if half_span <= 0.0 || root_chord <= 0.0 || m == 0 {
            return Err(AeroError::InvalidGeometry(format!(
                "half span {half_span}, root chord {root_chord}, {m} strips"
            )));
        }
        let w = half_span / m as f64;
        let strips = (0..m)
            .map(|i| {
                let s = (i as f64 + 0.5) * w;
                Strip {
                    station: s,
                    chord: root_chord * (1.0 - (s / half_span).powi(2)).sqrt(),
                    width: w,
                }
            })
            .collect();
        let g = Self { half_span, strips };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), AeroError> {
        let bad = |msg: String| Err(AeroError::InvalidGeometry(msg));
        if !(self.half_span > 0.0) {
            return bad(format!("half span {}", self.half_span));
        }
        if self.strips.is_empty() {
            return bad("no strips".into());
        }
        let mut prev = 0.0;
        let mut total = 0.0;
        for (i, s) in self.strips.iter().enumerate() {
            if !(s.station > prev && s.station < self.half_span) {
                return bad(format!(
                    "strip {i}: station {} not strictly increasing inside (0, l)",
                    s.station
                ));
            }
            if !(s.chord > 0.0 && s.width > 0.0) {
                return bad(format!("strip {i}: chord {} width {}", s.chord, s.width));
            }
            prev = s.station;
            total += s.width;
        }
        if total > self.half_span * (1.0 + 1e-12) {
            return bad(format!(
                "strip widths sum to {total} > half span {}",
                self.half_span
            ));
        }
        Ok(())
    }

    pub fn strip_count(&self) -> usize {
        self.strips.len()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.strips
            .iter()
            .map(|s| (s.station / self.half_span).acos())
            .collect()
    }

    /// y_Γ,i = Σ_k a_k sin(kθ_i)/sin(θ_i).
    pub fn induced_kinematics(&self, fourier_a: &[f64]) -> Vec<f64> {
        self.thetas()
            .iter()
            .map(|&t| circulation(fourier_a, t) / t.sin())
            .collect()
    }
}
