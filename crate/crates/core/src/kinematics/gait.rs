//! Target armwing gait: a sinusoidal shoulder plunge and a skewed-sinusoid
//! elbow extension profile that opens quickly and retracts slowly.

use std::f64::consts::{PI, TAU};

const DEG: f64 = PI / 180.0;

/// Skew parameter of the elbow profile.
const ELBOW_SKEW: f64 = 0.5;

/// Target shoulder and elbow angles at a flapping phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitTargets {
    /// Flapping phase, wrapped into [0, 2π).
    pub phase: f64,
    pub theta_s_hat: f64,
    pub theta_e_hat: f64,
}

pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The unit-amplitude skewed sinusoid driving the elbow, in [-1, 1].
///
/// `arg(1 + k e^{iψ})` peaks at `asin(k)`, so dividing by it normalises the
/// extrema to ±1 while preserving the fast-open/slow-close skew.
fn skewed_unit(phi: f64) -> f64 {
    let psi = phi + 2.0 * PI / 3.0;
    let g = (-ELBOW_SKEW * psi.sin()).atan2(1.0 + ELBOW_SKEW * psi.cos());
    -g / ELBOW_SKEW.asin()
}

fn skewed_unit_derivatives(phi: f64) -> (f64, f64) {
    // g = -arg(1 + k e^{iψ}); dg/dψ = -(k² + k cos ψ) / (1 + k² + 2k cos ψ)
    let k = ELBOW_SKEW;
    let psi = phi + 2.0 * PI / 3.0;
    let (s, c) = psi.sin_cos();
    let den = 1.0 + k * k + 2.0 * k * c;
    let num = k * k + k * c;
    let dg = -num / den;
    // d/dψ of (num/den)
    let dnum = -k * s;
    let dden = -2.0 * k * s;
    let ddg = -(dnum * den - num * dden) / (den * den);
    let scale = -1.0 / k.asin();
    (scale * dg, scale * ddg)
}

pub fn target_gait(phi: f64) -> GaitTargets {
    let phase = wrap_phase(phi);
    GaitTargets {
        phase,
        theta_s_hat: 35.0 * DEG * phase.sin() - 10.0 * DEG,
        theta_e_hat: 120.0 * DEG + 45.0 * DEG * skewed_unit(phase),
    }
}

/// First and second phase derivatives of (θ̂_s, θ̂_e).
pub fn target_gait_derivatives(phi: f64) -> ([f64; 2], [f64; 2]) {
    let (d1, d2) = skewed_unit_derivatives(phi);
    (
        [35.0 * DEG * phi.cos(), 45.0 * DEG * d1],
        [-35.0 * DEG * phi.sin(), 45.0 * DEG * d2],
    )
}

/// Uniform phase grid `φ_k = 2πk/N`.
pub fn phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

pub fn sample_targets(n: usize) -> Vec<GaitTargets> {
    phase_grid(n).into_iter().map(target_gait).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shoulder_reference_points() {
        assert_abs_diff_eq!(target_gait(0.0).theta_s_hat, -10.0 * DEG, epsilon = 1e-15);
        assert_abs_diff_eq!(
            target_gait(PI / 2.0).theta_s_hat,
            25.0 * DEG,
            epsilon = 1e-14
        );
    }

    #[test]
    fn elbow_midline_crossing() {
        assert_abs_diff_eq!(
            target_gait(4.0 * PI / 3.0).theta_e_hat,
            120.0 * DEG,
            epsilon = 1e-12
        );
    }

    #[test]
    fn elbow_extrema_by_dense_sampling() {
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for g in sample_targets(200_000) {
            lo = lo.min(g.theta_e_hat);
            hi = hi.max(g.theta_e_hat);
        }
        assert_abs_diff_eq!(lo / DEG, 75.0, epsilon = 1e-6);
        assert_abs_diff_eq!(hi / DEG, 165.0, epsilon = 1e-6);
    }

    #[test]
    fn elbow_opens_faster_than_it_closes() {
        // minimum at φ = 2π/3, maximum at φ = 0: the closing half takes 120°
        let at = |deg: f64| target_gait(deg * DEG).theta_e_hat / DEG;
        assert_abs_diff_eq!(at(0.0), 165.0, epsilon = 1e-9);
        assert_abs_diff_eq!(at(120.0), 75.0, epsilon = 1e-9);
    }

    #[test]
    fn periodic_and_wrapped() {
        for k in 0..50 {
            let phi = k as f64 * 0.37;
            let a = target_gait(phi);
            let b = target_gait(phi + TAU);
            assert_abs_diff_eq!(a.theta_e_hat, b.theta_e_hat, epsilon = 1e-12);
            assert_abs_diff_eq!(a.theta_s_hat, b.theta_s_hat, epsilon = 1e-12);
            assert!((0.0..TAU).contains(&a.phase));
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-5;
        for k in 0..40 {
            let phi = k as f64 * 0.157;
            let (d1, d2) = target_gait_derivatives(phi);
            let f = |p: f64| {
                let g = target_gait(p);
                [g.theta_s_hat, g.theta_e_hat]
            };
            let (p, c, m) = (f(phi + h), f(phi), f(phi - h));
            for j in 0..2 {
                assert_abs_diff_eq!(d1[j], (p[j] - m[j]) / (2.0 * h), epsilon = 1e-7);
                assert_abs_diff_eq!(d2[j], (p[j] - 2.0 * c[j] + m[j]) / (h * h), epsilon = 1e-3);
            }
        }
    }
}
