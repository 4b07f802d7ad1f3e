use serde::{Deserialize, Serialize};

use super::integrator::Integrator;
use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    #[default]
    Hover,
    WingtipTrace,
    AeroStep,
    ObserverDemo,
    FreeFlight,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Hover,
        Scenario::WingtipTrace,
        Scenario::AeroStep,
        Scenario::ObserverDemo,
        Scenario::FreeFlight,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Hover => "hover",
            Scenario::WingtipTrace => "wingtip-trace",
            Scenario::AeroStep => "aero-step",
            Scenario::ObserverDemo => "observer-demo",
            Scenario::FreeFlight => "free-flight",
        }
    }

    /// Scenarios that drive the wings and so need the flapping resolution guard.
    pub fn flaps(&self) -> bool {
        matches!(
            self,
            Scenario::Hover | Scenario::WingtipTrace | Scenario::FreeFlight
        )
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|s| s.name()).collect();
                format!("unknown scenario '{s}' (valid: {})", names.join(", "))
            })
    }
}

/// Pass/fail limits checked by each scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub rms_position: f64,
    pub rms_attitude_deg: f64,
    /// Fraction of the wingspan.
    pub wingtip_deviation: f64,
    /// Relative RMS error of β against the convolution oracle.
    pub aero_rms_error: f64,
    pub observer_error: f64,
    /// Relative energy drift of a conservative free-flight run.
    pub energy_drift: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            rms_position: 0.02,
            rms_attitude_deg: 5.0,
            wingtip_deviation: 0.05,
            aero_rms_error: 0.01,
            observer_error: 1e-6,
            energy_drift: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub dt: f64,
    pub duration: f64,
    /// Length of the free-flight run. Without aerodynamic drag on the guard the
    /// fall speed grows until the Aerobat tumbles, so the default is a short drop.
    pub drop_duration: f64,
    pub integrator: Integrator,
    pub seed: u64,
    /// Leading window excluded from hover metrics.
    pub transient: f64,
    /// Standard deviation of additive noise on the measured pose (m and rad).
    pub measurement_noise: f64,
    /// Relative standard deviation of each flapping phase increment.
    pub phase_jitter: f64,
    /// Wingbeats traced by the wingtip scenario.
    pub wingbeats: usize,
    /// Write every n-th step to the trajectory log.
    pub log_every: usize,
    pub motors_enabled: bool,
    pub aero_enabled: bool,
    /// Phase samples and harmonics used to resample the linkage gait.
    pub gait_grid: usize,
    pub gait_harmonics: usize,
    /// Time step and length of the aero-step and observer-demo oracle runs.
    pub oracle_dt: f64,
    pub oracle_duration: f64,
    /// Amplitude of the sinusoidal strip forcing in aero-step.
    pub forcing_amplitude: f64,
    pub thresholds: Thresholds,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Hover,
            dt: 2.5e-4,
            duration: 10.0,
            drop_duration: 1.0,
            integrator: Integrator::Rk4,
            seed: 0,
            transient: 2.0,
            measurement_noise: 0.0,
            phase_jitter: 0.0,
            wingbeats: 3,
            log_every: 4,
            motors_enabled: true,
            aero_enabled: true,
            gait_grid: 256,
            gait_harmonics: 16,
            oracle_dt: 1e-4,
            oracle_duration: 0.25,
            forcing_amplitude: 0.5,
            thresholds: Thresholds::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self, flapping_frequency: f64) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.dt > 0.0) || !(self.oracle_dt > 0.0) {
            return bad(format!(
                "dt {} and oracle_dt {} must be positive",
                self.dt, self.oracle_dt
            ));
        }
        if !(self.duration >= self.dt && self.drop_duration >= self.dt) {
            return bad(format!(
                "duration {} and drop_duration {} must be at least dt {}",
                self.duration, self.drop_duration, self.dt
            ));
        }
        if self.scenario.flaps()
            && flapping_frequency > 0.0
            && self.dt > 1.0 / (100.0 * flapping_frequency)
        {
            return bad(format!(
                "dt {} exceeds 1/(100 f) = {} for {} Hz flapping",
                self.dt,
                1.0 / (100.0 * flapping_frequency),
                flapping_frequency
            ));
        }
        if self.log_every == 0 || self.wingbeats == 0 || self.gait_grid < 8 {
            return bad("log_every, wingbeats must be positive and gait_grid at least 8".into());
        }
        if 2 * self.gait_harmonics >= self.gait_grid {
            return bad(format!(
                "{} harmonics need more than {} phase samples",
                self.gait_harmonics, self.gait_grid
            ));
        }
        if !(self.measurement_noise >= 0.0 && self.phase_jitter >= 0.0 && self.transient >= 0.0) {
            return bad("noise levels and transient must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate(8.0).unwrap();
    }

    #[test]
    fn coarse_step_is_rejected_for_flapping() {
        let c = SimConfig {
            dt: 2e-3,
            ..Default::default()
        };
        assert!(c.validate(8.0).is_err());
        let c = SimConfig {
            dt: 2e-3,
            scenario: Scenario::ObserverDemo,
            ..Default::default()
        };
        c.validate(8.0).unwrap();
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        let err = "hovering".parse::<Scenario>().unwrap_err();
        assert!(err.contains("wingtip-trace"));
    }
}
