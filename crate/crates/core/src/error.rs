use thiserror::Error;

/// Linkage kinematics and synthesis failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum KinematicsError {
    /// A circle-circle intersection had no solution, so the loop cannot close.
    #[error("linkage cannot assemble at crank angle {crank_angle:.6} rad (loop {loop_name})")]
    Assembly {
        crank_angle: f64,
        loop_name: &'static str,
    },
    #[error("target sequence has zero variance")]
    DegenerateTarget,
    #[error("sequence length mismatch or too short (actual {actual}, target {target})")]
    LengthMismatch { actual: usize, target: usize },
    #[error("initial design is infeasible on the phase grid: {0}")]
    NoFeasibleStart(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AeroError {
    #[error("span station {station} outside [0, {half_span}]")]
    Domain { station: f64, half_span: f64 },
    #[error("stacked circulation matrix is singular (condition number {0:e})")]
    SingularSystem(f64),
    #[error("invalid wing geometry: {0}")]
    InvalidGeometry(String),
    #[error("lag-state realization diverged at t = {time:.4} s")]
    Divergence { time: f64 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("reduced-order inertia matrix is ill-conditioned (condition number {0:e})")]
    SingularInertia(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Aero(#[from] AeroError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ControlError {
    #[error("requested pole {0} is not in the open left half-plane")]
    UnstablePoleRequest(f64),
    #[error("input map is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("observer error dynamics are not Hurwitz (max real part {0})")]
    NotHurwitz(f64),
    #[error("wrench cannot be reproduced within motor limits (residual norm {residual_norm:e})")]
    InfeasibleWrench {
        achievable: [f64; 4],
        command: [f64; 6],
        residual: [f64; 4],
        residual_norm: f64,
    },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("numerical blow-up at t = {time:.4} s (state norm {norm:e})")]
    NumericalBlowup { time: f64, norm: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Aero(#[from] AeroError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Config ingestion failure with the offending key (and source line when known).
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{message}")]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            key: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn at_key(key: impl Into<String>, message: impl Into<String>) -> Self {
        let key = key.into();
        Self {
            message: format!("{key}: {}", message.into()),
            key: Some(key),
            line: None,
        }
    }
}
