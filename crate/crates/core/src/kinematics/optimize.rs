//! Multi-start design synthesis of the armwing linkage against the target gait.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bend::{bend_angle_check, bend_limits, max_bends, BendReport};
use super::fit::r_squared;
use super::gait::GaitTargets;
use super::linkage::{
    forward_kinematics, forward_kinematics_continuous, CouplerLengths, GroundPivots, LeverOffsets,
    LinkageDesign, LinkageState, DESIGN_DIM, JOINT_COUNT,
};
use super::nelder_mead::{minimize, NelderMeadOptions};
use crate::error::KinematicsError;

/// Objective value assigned to designs that fail to assemble.
pub const INFEASIBLE_PENALTY: f64 = 1e3;
const CONSTRAINT_WEIGHT: f64 = 10.0;
/// Slack kept below each hinge limit, since the objective sees a coarser grid
/// than the final check.
const BEND_MARGIN: f64 = 1.0 * PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignBounds {
    pub lower: LinkageDesign,
    pub upper: LinkageDesign,
}

impl Default for DesignBounds {
    fn default() -> Self {
        let base = LinkageDesign::default();
        let lengths = |v: f64| CouplerLengths {
            shoulder_coupler: v,
            shoulder_lever: v,
            elbow_coupler: v,
            elbow_rocker: v,
            rocker_drive_arm: v,
            drive_link: v,
            radius_extension: v,
        };
        let pivots = |v: f64| GroundPivots {
            shoulder: [v, v],
            elbow_rocker: [v, v],
        };
        let offsets = |v: f64| LeverOffsets {
            shoulder_lever: v,
            rocker: v,
            radius_extension: v,
        };
        Self {
            lower: LinkageDesign {
                crank_radius_shoulder: 0.002,
                crank_radius_elbow: 0.002,
                coupler_lengths: lengths(0.004),
                ground_pivot_positions: pivots(-0.05),
                lever_offsets: offsets(-PI),
                phase_offset: -PI,
                ..base
            },
            upper: LinkageDesign {
                crank_radius_shoulder: 0.025,
                crank_radius_elbow: 0.025,
                coupler_lengths: lengths(0.09),
                ground_pivot_positions: pivots(0.05),
                lever_offsets: offsets(PI),
                phase_offset: PI,
                ..base
            },
        }
    }
}

impl DesignBounds {
    pub fn vectors(&self) -> ([f64; DESIGN_DIM], [f64; DESIGN_DIM]) {
        (self.lower.to_vector(), self.upper.to_vector())
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        let (lo, hi) = self.vectors();
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(KinematicsError::InvalidDesign(format!(
                    "bound {i}: lower {l} > upper {h}"
                )));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, design: &LinkageDesign) -> LinkageDesign {
        let (lo, hi) = self.vectors();
        let x: Vec<f64> = design
            .to_vector()
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(v, (l, h))| v.clamp(*l, *h))
            .collect();
        design.with_vector(&x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub grid_points: usize,
    pub multi_starts: usize,
    pub max_evaluations: usize,
    /// Relative perturbation (fraction of the box width) for restarts.
    pub start_spread: f64,
    pub seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_points: 128,
            multi_starts: 16,
            max_evaluations: 12_000,
            start_spread: 0.15,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub optimized_design: LinkageDesign,
    pub r2_shoulder: f64,
    pub r2_elbow: f64,
    pub theta_s_range: (f64, f64),
    pub theta_e_range: (f64, f64),
    pub max_bend_angles: [f64; JOINT_COUNT],
    pub bend_pass: bool,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best objective after each iteration, across all starts in order.
    pub history: Vec<f64>,
    /// Sampled trajectories on the phase grid: (φ, θ_s, θ̂_s, θ_e, θ̂_e).
    pub trajectory: Vec<[f64; 5]>,
}

/// Tracking objective over a fixed phase grid.
pub struct TrackingObjective<'a> {
    base: LinkageDesign,
    targets: &'a [GaitTargets],
}

impl<'a> TrackingObjective<'a> {
    pub fn new(base: LinkageDesign, targets: &'a [GaitTargets]) -> Self {
        Self { base, targets }
    }

    /// Continuity-tracked sweep that reports how far it got on failure.
    fn sweep(&self, design: &LinkageDesign) -> Result<Vec<LinkageState>, usize> {
        let mut out: Vec<LinkageState> = Vec::with_capacity(self.targets.len());
        for (k, t) in self.targets.iter().enumerate() {
            let s = match out.last() {
                None => forward_kinematics(design, t.phase),
                Some(prev) => forward_kinematics_continuous(design, t.phase, prev),
            };
            match s {
                Ok(s) => out.push(s),
                Err(_) => return Err(k),
            }
        }
        Ok(out)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let design = self.base.with_vector(x);
        if design.validate().is_err() {
            return 2.0 * INFEASIBLE_PENALTY;
        }
        let states = match self.sweep(&design) {
            Ok(s) => s,
            Err(reached) => {
                return INFEASIBLE_PENALTY * (2.0 - reached as f64 / self.targets.len() as f64);
            }
        };
        let n = states.len() as f64;
        let mut sse = 0.0;
        let mut hyper = 0.0;
        for (s, t) in states.iter().zip(self.targets) {
            sse += (s.theta_s - t.theta_s_hat).powi(2) + (s.theta_e - t.theta_e_hat).powi(2);
            hyper += (s.theta_e - PI).max(0.0).powi(2);
        }
        let bends = max_bends(&states);
        let bend_excess: f64 = bend_limits()
            .iter()
            .zip(&bends)
            .filter_map(|(lim, b)| lim.map(|l| (b - (l - BEND_MARGIN)).max(0.0).powi(2)))
            .sum();
        sse / n + CONSTRAINT_WEIGHT * (hyper / n + bend_excess)
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        let d = self.base.with_vector(x);
        d.validate().is_ok() && self.sweep(&d).is_ok()
    }
}

fn start_points(
    init: &[f64],
    lo: &[f64],
    hi: &[f64],
    settings: &OptimizerSettings,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut starts = vec![init.to_vec()];
    for k in 1..settings.multi_starts.max(1) {
        // alternate tight and wide neighbourhoods of the initial design
        let spread = if k % 2 == 1 {
            settings.start_spread
        } else {
            2.0 * settings.start_spread
        };
        let p: Vec<f64> = init
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(v, (l, h))| (v + spread * (h - l) * rng.random_range(-1.0..=1.0)).clamp(*l, *h))
            .collect();
        starts.push(p);
    }
    starts
}

pub fn optimize_linkage(
    init: &LinkageDesign,
    targets: &[GaitTargets],
    bounds: &DesignBounds,
    settings: &OptimizerSettings,
) -> Result<OptimizationReport, KinematicsError> {
    if targets.len() < 64 {
        return Err(KinematicsError::InvalidDesign(format!(
            "phase grid needs at least 64 points, got {}",
            targets.len()
        )));
    }
    bounds.validate()?;
    let init = bounds.clamp(init);
    init.validate()
        .map_err(|e| KinematicsError::NoFeasibleStart(e.to_string()))?;
    let objective = TrackingObjective::new(init, targets);
    if let Err(k) = objective.sweep(&init) {
        return Err(KinematicsError::NoFeasibleStart(format!(
            "initial design fails to assemble at grid phase {:.4} rad",
            targets[k].phase
        )));
    }

    let (lo, hi) = bounds.vectors();
    let x0 = init.to_vector();
    let steps: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (0.05 * (h - l)).max(1e-6))
        .collect();
    let opts = NelderMeadOptions {
        max_evaluations: settings.max_evaluations,
        f_tolerance: 1e-13,
        x_tolerance: 1e-7,
        initial_step: steps.clone(),
    };

    let starts = start_points(&x0, &lo, &hi, settings);
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| {
            let first = minimize(|x| objective.value(x), s, &lo, &hi, &opts);
            // one restart from the incumbent to recover from simplex collapse
            let fine = NelderMeadOptions {
                initial_step: steps.iter().map(|s| 0.2 * s).collect(),
                ..opts.clone()
            };
            let second = minimize(|x| objective.value(x), &first.x, &lo, &hi, &fine);
            (first, second)
        })
        .collect();

    let mut history = Vec::new();
    let mut best_so_far = f64::INFINITY;
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for (first, second) in &runs {
        for r in [first, second] {
            iterations += r.iterations;
            evaluations += r.evaluations;
            for v in &r.history {
                best_so_far = best_so_far.min(*v);
                history.push(best_so_far);
            }
        }
        let (f, x, conv) = if second.f <= first.f {
            (second.f, &second.x, second.converged)
        } else {
            (first.f, &first.x, first.converged)
        };
        if best.as_ref().is_none_or(|(bf, _, _)| f < *bf) {
            best = Some((f, x.clone(), conv));
        }
    }
    let (f, x, converged) = best.expect("at least one start");
    if f >= INFEASIBLE_PENALTY || !objective.is_feasible(&x) {
        return Err(KinematicsError::NoFeasibleStart(
            "no start reached a feasible design".into(),
        ));
    }
    let design = init.with_vector(&x);
    let bends = bend_angle_check(&design, 720)?;
    report_for(
        design,
        targets,
        f,
        iterations,
        evaluations,
        converged,
        history,
        bends,
    )
}

#[allow(clippy::too_many_arguments)]
fn report_for(
    design: LinkageDesign,
    targets: &[GaitTargets],
    objective: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    history: Vec<f64>,
    bends: BendReport,
) -> Result<OptimizationReport, KinematicsError> {
    let states = TrackingObjective::new(design, targets)
        .sweep(&design)
        .map_err(|k| KinematicsError::Assembly {
            crank_angle: targets[k].phase,
            loop_name: "sweep",
        })?;
    let ts: Vec<f64> = states.iter().map(|s| s.theta_s).collect();
    let te: Vec<f64> = states.iter().map(|s| s.theta_e).collect();
    let ts_hat: Vec<f64> = targets.iter().map(|t| t.theta_s_hat).collect();
    let te_hat: Vec<f64> = targets.iter().map(|t| t.theta_e_hat).collect();
    let range = |v: &[f64]| {
        (
            v.iter().copied().fold(f64::MAX, f64::min),
            v.iter().copied().fold(f64::MIN, f64::max),
        )
    };
    let trajectory = targets
        .iter()
        .zip(&states)
        .map(|(t, s)| [t.phase, s.theta_s, t.theta_s_hat, s.theta_e, t.theta_e_hat])
        .collect();
    Ok(OptimizationReport {
        optimized_design: design,
        r2_shoulder: r_squared(&ts, &ts_hat)?,
        r2_elbow: r_squared(&te, &te_hat)?,
        theta_s_range: range(&ts),
        theta_e_range: range(&te),
        max_bend_angles: bends.max_bend_angles,
        bend_pass: bends.pass,
        objective,
        iterations,
        evaluations,
        converged,
        history,
        trajectory,
    })
}

/// Evaluates a fixed design against the targets without optimising.
pub fn evaluate_design(
    design: &LinkageDesign,
    targets: &[GaitTargets],
) -> Result<OptimizationReport, KinematicsError> {
    let objective = TrackingObjective::new(*design, targets);
    let f = objective.value(&design.to_vector());
    let bends = bend_angle_check(design, 720)?;
    report_for(*design, targets, f, 0, 1, true, Vec::new(), bends)
}
