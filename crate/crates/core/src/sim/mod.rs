pub mod config;
pub mod gait;
pub mod integrator;
pub mod log;
pub mod scenarios;

pub use config::{Scenario, SimConfig, Thresholds};
pub use gait::FourierGait;
pub use integrator::{Integrator, Stepper};
pub use log::{rms, Metrics, TrajectoryLog};
pub use scenarios::{
    aero_forcing, observer_demo_disturbance, run_aero_step, run_free_flight, run_hover,
    run_observer_demo, run_scenario, run_wingtip_trace, ScenarioOutput, BLOWUP_NORM,
};
