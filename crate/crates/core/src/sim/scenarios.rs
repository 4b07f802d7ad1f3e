//! Scenario runners: coupled hover and free flight, wingtip tracing, and the
//! two oracle comparisons (aerodynamic step response and observer transient).

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3, Vector4, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::Scenario;
use super::gait::FourierGait;
use super::integrator::Stepper;
use super::log::{rms, Metrics, TrajectoryLog};
use crate::aero::{aero_step, wagner_response_oracle, AeroModel, AeroState};
use crate::config::Config;
use crate::control::{
    allocate_saturating, control_law, observer_step, observer_step_with, place_observer_poles,
    pose_error, wrap_angle, Allocation, ObserverState, PlantModel, Setpoint,
};
use crate::dynamics::{
    normalize_quaternion, wingtip, CoupledModel, CoupledState, GaitSample, GuardState, AEROBAT_DIM,
    GUARD_DIM,
};
use crate::error::SimError;
use crate::kinematics::{forward_kinematics, forward_kinematics_continuous};

/// State norm treated as numerical blow-up.
pub const BLOWUP_NORM: f64 = 1e6;

/// Result of one run. `failure` is set when the run aborted part way; the
/// logs then hold everything recorded up to that point.
#[derive(Debug)]
pub struct ScenarioOutput {
    /// (file stem, log) pairs.
    pub logs: Vec<(String, TrajectoryLog)>,
    pub metrics: Metrics,
    pub failure: Option<SimError>,
}

/// Runs the scenario selected in `cfg.sim.scenario`.
pub fn run_scenario(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    match cfg.sim.scenario {
        Scenario::Hover => run_hover(cfg),
        Scenario::FreeFlight => run_free_flight(cfg),
        Scenario::WingtipTrace => run_wingtip_trace(cfg),
        Scenario::AeroStep => run_aero_step(cfg),
        Scenario::ObserverDemo => run_observer_demo(cfg),
    }
}

fn step_count(duration: f64, dt: f64) -> usize {
    (duration / dt).round().max(1.0) as usize
}

fn check_finite(x: &[f64], time: f64) -> Result<(), SimError> {
    let max = x.iter().fold(0.0f64, |m, v| {
        if v.is_finite() {
            m.max(v.abs())
        } else {
            f64::INFINITY
        }
    });
    if max > BLOWUP_NORM {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        return Err(SimError::NumericalBlowup {
            time,
            norm: if norm.is_finite() {
                norm
            } else {
                f64::INFINITY
            },
        });
    }
    Ok(())
}

fn pose(g: &GuardState) -> Vector6<f64> {
    let e = g.euler();
    Vector6::new(g.position.x, g.position.y, g.position.z, e.x, e.y, e.z)
}

const COUPLED_COLUMNS: &[&str] = &[
    "time",
    "p_g_x",
    "p_g_y",
    "p_g_z",
    "roll_g",
    "pitch_g",
    "yaw_g",
    "omega_g_x",
    "omega_g_y",
    "omega_g_z",
    "p_a_x",
    "p_a_y",
    "p_a_z",
    "roll_a",
    "pitch_a",
    "yaw_a",
    "theta_s",
    "theta_e",
    "f1",
    "f2",
    "f3",
    "f4",
    "f5",
    "f6",
    "band_force_x",
    "band_force_y",
    "band_force_z",
    "aero_force_x",
    "aero_force_y",
    "aero_force_z",
    "u_f",
    "u_mx",
    "u_my",
    "u_mz",
    "residual_norm",
    "xhat1_x",
    "xhat1_y",
    "xhat1_z",
    "xhat1_roll",
    "xhat1_pitch",
    "xhat1_yaw",
    "xhat2_x",
    "xhat2_y",
    "xhat2_z",
    "xhat2_roll",
    "xhat2_pitch",
    "xhat2_yaw",
    "xhat3_x",
    "xhat3_y",
    "xhat3_z",
    "xhat3_roll",
    "xhat3_pitch",
    "xhat3_yaw",
    "energy",
];

/// Guard and Aerobat released at the band equilibrium. With `motors_on` the
/// observer and control law run every step; otherwise the guard is unpowered
/// and the estimate columns stay at zero.
fn run_coupled(
    cfg: &Config,
    scenario: Scenario,
    motors_on: bool,
) -> Result<ScenarioOutput, SimError> {
    let sim = &cfg.sim;
    let dp = &cfg.dynamics;
    let frequency = dp.aerobat.flapping_frequency;
    let gait = FourierGait::from_design(
        &cfg.kinematics.design,
        sim.gait_grid,
        sim.gait_harmonics,
        frequency,
    )?;
    let mut model = CoupledModel::new(dp.clone(), &cfg.aero)?;
    model.aero_enabled = sim.aero_enabled;

    let guard0 = GuardState::default();
    let aerobat0 = model.static_equilibrium(&guard0, &gait.sample(0.0))?;
    let s0 = model.initial_state(guard0, aerobat0);
    let mut x = model.pack(&s0);
    let dim = x.len();
    let mut mask = vec![false; dim];
    for i in (0..3)
        .chain(6..10)
        .chain(GUARD_DIM..GUARD_DIM + AEROBAT_DIM / 2)
    {
        mask[i] = true;
    }

    let plant = PlantModel::from_params(dp);
    let gains = place_observer_poles(&cfg.control.observer_poles, plant.disturbance_gain)?
        .inflated(cfg.control.gain_inflation);
    let setpoint = Setpoint {
        position: guard0.position,
        yaw: guard0.euler().z,
    };
    let reference = pose(&guard0);

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut measure = |s: &GuardState| -> Vector6<f64> {
        let mut y = pose(s);
        if sim.measurement_noise > 0.0 {
            for v in y.iter_mut() {
                let n: f64 = StandardNormal.sample(&mut rng);
                *v += sim.measurement_noise * n;
            }
        }
        y
    };
    let mut y = measure(&guard0);
    let mut obs = ObserverState::at(y);
    let mut stepper = Stepper::new(sim.integrator, dim);
    let mut scratch = vec![0.0; dim];

    let mut log = TrajectoryLog::new(COUPLED_COLUMNS.iter().copied());
    let duration = if scenario == Scenario::FreeFlight {
        sim.drop_duration
    } else {
        sim.duration
    };
    let steps = step_count(duration, sim.dt);
    let conservative = !motors_on
        && !sim.aero_enabled
        && frequency == 0.0
        && cfg.dynamics.suspension.damping == 0.0;
    let e0 = model.total_energy(&s0, &gait.sample(0.0));
    let (mut max_drift, mut max_ke) = (0.0f64, 0.0f64);
    let (mut pos_err, mut att_err) = (Vec::new(), Vec::new());
    let mut err_norms = Vec::with_capacity(steps + 1);
    let mut saturated = 0usize;
    let mut failure = None;
    let mut done = 0usize;

    for k in 0..=steps {
        let t = k as f64 * sim.dt;
        let s = model.unpack(&x, t);
        let truth = pose(&s.guard);
        let e = pose_error(&truth, &reference);
        let pe = e.fixed_rows::<3>(0).norm();
        err_norms.push(pe);
        if t >= sim.transient - 1e-12 {
            pos_err.push(pe);
            att_err.push(e.fixed_rows::<3>(3).norm().to_degrees());
        }
        if conservative {
            let g = gait.sample(t);
            let energy = model.total_energy(&s, &g);
            max_drift = max_drift.max((energy - e0).abs());
            max_ke = max_ke.max(energy - potential(&model, &s, &g));
        }

        let alloc = if motors_on {
            match control_law(&obs, &setpoint, &cfg.control, &plant) {
                Ok(c) => allocate_saturating(&c.wrench, &dp.guard, cfg.control.motor_limit),
                Err(err) => {
                    failure = Some(err.into());
                    break;
                }
            }
        } else {
            Allocation {
                motors: [0.0; 6],
                achieved: Vector4::zeros(),
                residual: Vector4::zeros(),
            }
        };
        if motors_on && alloc.saturated() {
            saturated += 1;
        }

        if k % sim.log_every == 0 || k == steps {
            let g = gait.sample(t);
            let out = model.derivatives(&x, t, &alloc.motors, &g, &mut scratch)?;
            let aero = out.aero[0].total_force + out.aero[1].total_force;
            let band = out.suspension.guard_force;
            let energy = model.total_energy(&s, &g);
            let mut row = Vec::with_capacity(COUPLED_COLUMNS.len());
            row.push(t);
            row.extend(truth.iter());
            row.extend(s.guard.angular_velocity.iter());
            row.extend(s.aerobat.position.iter());
            row.extend(s.aerobat.euler.iter());
            row.extend(g.angle);
            row.extend(alloc.motors);
            row.extend(band.iter());
            row.extend(aero.iter());
            row.extend(alloc.achieved.iter());
            row.push(alloc.residual.norm());
            row.extend(obs.x1.iter());
            row.extend(obs.x2.iter());
            row.extend(obs.x3.iter());
            row.push(energy);
            log.push(row);
        }
        if k == steps {
            break;
        }

        let motors = alloc.motors;
        let r = stepper.step(
            |tt, xx: &[f64], dx: &mut [f64]| {
                model
                    .derivatives(xx, tt, &motors, &gait.sample(tt), dx)
                    .map(|_| ())
            },
            t,
            &mut x,
            sim.dt,
            &mask,
        );
        if let Err(err) = r {
            failure = Some(err.into());
            break;
        }
        normalize_quaternion(&mut x, 6);
        if let Err(err) = check_finite(&x, t + sim.dt) {
            failure = Some(err);
            break;
        }
        if motors_on {
            let y_next = measure(&GuardState::unpack(&x));
            obs = observer_step(&obs, &y, &y_next, &alloc.achieved, &plant, &gains, sim.dt);
            if !obs.is_finite() {
                failure = Some(SimError::NumericalBlowup {
                    time: t + sim.dt,
                    norm: f64::INFINITY,
                });
                break;
            }
            y = y_next;
        }
        done = k + 1;
    }

    let final_state = model.unpack(&x, done as f64 * sim.dt);
    let mut metrics = Metrics {
        scenario: scenario.name().into(),
        steps: done,
        simulated_time: done as f64 * sim.dt,
        altitude_change: Some(final_state.guard.position.z - guard0.position.z),
        ..Default::default()
    };
    if motors_on {
        metrics.saturated_fraction = Some(saturated as f64 / (done.max(1)) as f64);
    }
    if !pos_err.is_empty() {
        metrics.rms_position_error = Some(rms(pos_err.iter().copied()));
        metrics.rms_attitude_error_deg = Some(rms(att_err.iter().copied()));
    }
    let per_cycle = if frequency > 0.0 {
        (1.0 / (frequency * sim.dt)).round() as usize
    } else {
        1
    };
    metrics.settling_time = settling_time(&err_norms, per_cycle.max(1), sim.dt);
    if conservative && max_ke > 0.0 {
        metrics.energy_drift = Some(max_drift / max_ke);
    }
    let th = &sim.thresholds;
    metrics.thresholds_met = failure.is_none()
        && match scenario {
            Scenario::FreeFlight => {
                metrics.altitude_change.is_some_and(|dz| dz < 0.0)
                    && metrics.energy_drift.is_none_or(|d| d <= th.energy_drift)
            }
            _ => {
                metrics
                    .rms_position_error
                    .is_some_and(|v| v <= th.rms_position)
                    && metrics
                        .rms_attitude_error_deg
                        .is_some_and(|v| v <= th.rms_attitude_deg)
            }
        };
    Ok(ScenarioOutput {
        logs: vec![(scenario.name().into(), log)],
        metrics,
        failure,
    })
}

/// Band and gravitational energy, so kinetic energy = total − potential.
fn potential(model: &CoupledModel, s: &CoupledState, g: &GaitSample) -> f64 {
    let mut still = s.clone();
    still.guard.velocity = Vector3::zeros();
    still.guard.angular_velocity = Vector3::zeros();
    still.aerobat.velocity = Vector3::zeros();
    still.aerobat.euler_rates = Vector3::zeros();
    let g0 = GaitSample {
        rate: [0.0; 2],
        ..*g
    };
    model.total_energy(&still, &g0)
}

/// Time after which the wingbeat-averaged position error stays inside 2% of
/// its peak; `None` when it never settles or never moves.
fn settling_time(err: &[f64], window: usize, dt: f64) -> Option<f64> {
    if err.len() < window {
        return None;
    }
    let mut avg = Vec::with_capacity(err.len() - window + 1);
    let mut sum: f64 = err[..window].iter().sum();
    avg.push(sum / window as f64);
    for i in window..err.len() {
        sum += err[i] - err[i - window];
        avg.push(sum / window as f64);
    }
    let peak = avg.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return None;
    }
    let last_out = avg.iter().rposition(|v| *v > 0.02 * peak)?;
    if last_out + 1 >= avg.len() {
        return None;
    }
    Some((last_out + window) as f64 * dt)
}

/// Coupled hover under observer-based control.
pub fn run_hover(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    run_coupled(cfg, Scenario::Hover, cfg.sim.motors_enabled)
}

/// Coupled system with the guard motors off.
pub fn run_free_flight(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    run_coupled(cfg, Scenario::FreeFlight, false)
}

/// Left wingtip path in the Aerobat body y-z plane over several wingbeats,
/// with optional multiplicative jitter on each phase increment.
pub fn run_wingtip_trace(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    let sim = &cfg.sim;
    let design = &cfg.kinematics.design;
    let ap = &cfg.dynamics.aerobat;
    let frequency = ap.flapping_frequency;
    let per_cycle = if frequency > 0.0 {
        (1.0 / (frequency * sim.dt)).round().max(1.0) as usize
    } else {
        100
    };
    let dphi = if frequency > 0.0 {
        TAU / per_cycle as f64
    } else {
        0.0
    };
    let total = per_cycle * sim.wingbeats;
    let span = 2.0 * (ap.shoulder_offset + ap.humerus_length + ap.radius_length);

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut log = TrajectoryLog::new([
        "time", "phase", "cycle", "tip_y", "tip_z", "theta_s", "theta_e",
    ]);
    let mut tips: Vec<Vector3<f64>> = Vec::with_capacity(total);
    let mut phi = 0.0;
    let mut prev = forward_kinematics(design, phi)?;
    let mut failure = None;
    for k in 0..total {
        let state = if k == 0 {
            Ok(prev.clone())
        } else {
            forward_kinematics_continuous(design, phi, &prev)
        };
        let state = match state {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e.into());
                break;
            }
        };
        let tip = wingtip(ap, &GaitSample::frozen(state.theta_s, state.theta_e), 1.0);
        log.push(vec![
            k as f64 * sim.dt,
            phi,
            (k / per_cycle) as f64,
            tip.y,
            tip.z,
            state.theta_s,
            state.theta_e,
        ]);
        tips.push(tip);
        prev = state;
        let jitter: f64 = if sim.phase_jitter > 0.0 {
            StandardNormal.sample(&mut rng)
        } else {
            0.0
        };
        phi += dphi * (1.0 + sim.phase_jitter * jitter);
    }
    let mut deviation = 0.0f64;
    for k in per_cycle..tips.len() {
        let d = tips[k] - tips[k - per_cycle];
        deviation = deviation.max(Vector3::new(0.0, d.y, d.z).norm());
    }
    let deviation = deviation / span;
    let metrics = Metrics {
        scenario: Scenario::WingtipTrace.name().into(),
        steps: tips.len(),
        simulated_time: tips.len() as f64 * sim.dt,
        wingtip_deviation: Some(deviation),
        thresholds_met: failure.is_none() && deviation <= sim.thresholds.wingtip_deviation,
        ..Default::default()
    };
    Ok(ScenarioOutput {
        logs: vec![(Scenario::WingtipTrace.name().into(), log)],
        metrics,
        failure,
    })
}

/// Strip forcing y1ᵢ(t) = A sin(2π f t)(1 + 0.1 i) used by the aero-step scenario.
pub fn aero_forcing(amplitude: f64, frequency: f64, strips: usize, t: f64) -> Vec<f64> {
    let s = (TAU * frequency * t).sin();
    (0..strips)
        .map(|i| amplitude * s * (1.0 + 0.1 * i as f64))
        .collect()
}

/// State-space lift response against direct convolution with the indicial
/// function, per strip. The first tenth of the record is excluded from the
/// error so both sides have left the start-up transient.
pub fn run_aero_step(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    let sim = &cfg.sim;
    let model = AeroModel::new(&cfg.aero)?;
    let m = model.strip_count();
    let frequency = if cfg.dynamics.aerobat.flapping_frequency > 0.0 {
        cfg.dynamics.aerobat.flapping_frequency
    } else {
        8.0
    };
    let dt = sim.oracle_dt;
    let steps = step_count(sim.oracle_duration, dt);
    let mut s = AeroState::zeros(&model);
    let mut yp_hist = vec![Vec::with_capacity(steps + 1); m];
    let mut beta_hist = vec![Vec::with_capacity(steps + 1); m];
    let mut failure = None;
    for j in 0..=steps {
        let t = j as f64 * dt;
        let y1 = aero_forcing(sim.forcing_amplitude, frequency, m, t);
        let yp = model.effective_input(&s.fourier_a, &y1);
        let beta = model.beta(&s.xi(), &y1);
        for i in 0..m {
            yp_hist[i].push(yp[i]);
            beta_hist[i].push(beta[i]);
        }
        if j == steps {
            break;
        }
        // forcing held at the step midpoint
        let ym = aero_forcing(sim.forcing_amplitude, frequency, m, t + 0.5 * dt);
        match aero_step(&s, &model, &ym, dt) {
            Ok(next) => s = next,
            Err(e) => {
                failure = Some(e.into());
                break;
            }
        }
    }
    let n = beta_hist[0].len();
    let oracle: Vec<Vec<f64>> = (0..m)
        .map(|i| wagner_response_oracle(&yp_hist[i], dt, &model.wagner, model.rates[i]))
        .collect();
    let skip = n / 10;
    let scale: Vec<f64> = (0..m)
        .map(|i| rms(oracle[i][skip..].iter().copied()).max(f64::MIN_POSITIVE))
        .collect();
    let rel: Vec<f64> = (0..m)
        .map(|i| {
            rms(oracle[i][skip..]
                .iter()
                .zip(&beta_hist[i][skip..])
                .map(|(o, b)| o - b))
                / scale[i]
        })
        .collect();

    let mut columns = vec!["time".to_string()];
    columns.extend((0..m).map(|i| format!("beta_{i}")));
    columns.extend((0..m).map(|i| format!("oracle_{i}")));
    columns.push("max_rel_error".into());
    let mut log = TrajectoryLog::new(columns);
    let mut max_err = 0.0f64;
    for j in 0..n {
        let mut row = vec![j as f64 * dt];
        row.extend((0..m).map(|i| beta_hist[i][j]));
        row.extend((0..m).map(|i| oracle[i][j]));
        let e = (0..m)
            .map(|i| (beta_hist[i][j] - oracle[i][j]).abs() / scale[i])
            .fold(0.0, f64::max);
        if j >= skip {
            max_err = max_err.max(e);
        }
        row.push(e);
        log.push(row);
    }
    let worst = rel.iter().copied().fold(0.0, f64::max);
    let metrics = Metrics {
        scenario: Scenario::AeroStep.name().into(),
        steps: n - 1,
        simulated_time: (n - 1) as f64 * dt,
        aero_rms_error: Some(worst),
        aero_max_error: Some(max_err),
        thresholds_met: failure.is_none() && worst <= sim.thresholds.aero_rms_error,
        ..Default::default()
    };
    Ok(ScenarioOutput {
        logs: vec![(Scenario::AeroStep.name().into(), log)],
        metrics,
        failure,
    })
}

/// Disturbance used by the observer demo on the three translational axes.
pub fn observer_demo_disturbance(amplitude: f64) -> Vector3<f64> {
    Vector3::new(amplitude, -0.5 * amplitude, 0.25 * amplitude)
}

/// Observer on a unit double integrator with a constant unknown input,
/// against the matrix exponential of its linear error dynamics.
pub fn run_observer_demo(cfg: &Config) -> Result<ScenarioOutput, SimError> {
    let sim = &cfg.sim;
    let gamma = 1.0;
    let gains = place_observer_poles(&cfg.control.observer_poles, gamma)?
        .inflated(cfg.control.gain_inflation);
    let plant = PlantModel {
        mass: 1.0,
        inertia: Matrix3::identity(),
        gravity: 0.0,
        disturbance_gain: gamma,
    };
    let big_g = observer_demo_disturbance(sim.forcing_amplitude);
    let truth = |t: f64| {
        let p = big_g * (0.5 * t * t);
        Vector6::new(p.x, p.y, p.z, 0.0, 0.0, 0.0)
    };
    let dt = sim.oracle_dt;
    let steps = step_count(sim.oracle_duration, dt);
    let mut columns = vec!["time".to_string()];
    for axis in ["x", "y", "z"] {
        for part in ["e1", "e2", "e3", "oracle_e1", "oracle_e2", "oracle_e3"] {
            columns.push(format!("{part}_{axis}"));
        }
    }
    columns.push("max_abs_error".into());
    let mut log = TrajectoryLog::new(columns);
    let a: Vec<Matrix3<f64>> = (0..3).map(|i| gains.error_matrix(i, gamma)).collect();
    let mut obs = ObserverState::default();
    let mut worst = 0.0f64;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let mut row = vec![t];
        let mut row_err = 0.0f64;
        for i in 0..3 {
            let e = Vector3::new(
                obs.x1[i] - big_g[i] * 0.5 * t * t,
                obs.x2[i] - big_g[i] * t,
                obs.x3[i] - big_g[i],
            );
            let oracle = (a[i] * t).exp() * Vector3::new(0.0, 0.0, -big_g[i]);
            row.extend(e.iter());
            row.extend(oracle.iter());
            row_err = row_err.max((e - oracle).amax());
        }
        row.push(row_err);
        worst = worst.max(row_err);
        log.push(row);
        if k == steps {
            break;
        }
        obs = observer_step_with(
            &obs,
            |h| truth(t + h * dt),
            &Vector4::zeros(),
            &plant,
            &gains,
            dt,
        );
        for i in 3..6 {
            obs.x1[i] = wrap_angle(obs.x1[i]);
        }
    }
    let metrics = Metrics {
        scenario: Scenario::ObserverDemo.name().into(),
        steps,
        simulated_time: steps as f64 * dt,
        observer_max_error: Some(worst),
        thresholds_met: worst <= sim.thresholds.observer_error,
        ..Default::default()
    };
    Ok(ScenarioOutput {
        logs: vec![(Scenario::ObserverDemo.name().into(), log)],
        metrics,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(scenario: Scenario) -> Config {
        let mut c = Config::default();
        c.sim.scenario = scenario;
        c.sim.duration = 0.25;
        c.sim.transient = 0.0;
        c
    }

    #[test]
    fn settling_of_a_decaying_error() {
        let err: Vec<f64> = (0..1000).map(|k| (-(k as f64) * 0.01).exp()).collect();
        let t = settling_time(&err, 1, 1.0).unwrap();
        // e^{-0.01 k} = 0.02 at k ≈ 391
        assert!((t - 392.0).abs() <= 1.0, "{t}");
        assert!(settling_time(&[0.0; 10], 1, 1.0).is_none());
    }

    #[test]
    fn blowup_is_detected() {
        assert!(check_finite(&[1.0, 2e6], 0.5).is_err());
        assert!(check_finite(&[1.0, f64::NAN], 0.5).is_err());
        check_finite(&[1.0, -3.0], 0.5).unwrap();
    }

    #[test]
    fn coupled_log_has_fixed_schema_and_increasing_time() {
        let out = run_hover(&short(Scenario::Hover)).unwrap();
        assert!(out.failure.is_none());
        let log = &out.logs[0].1;
        assert_eq!(log.columns.len(), COUPLED_COLUMNS.len());
        assert!(log.rows.iter().all(|r| r.len() == COUPLED_COLUMNS.len()));
        let t = log.column("time").unwrap();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!((t.last().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn noiseless_trace_repeats_exactly() {
        let out = run_wingtip_trace(&short(Scenario::WingtipTrace)).unwrap();
        assert!(out.metrics.wingtip_deviation.unwrap() <= 1e-9);
        assert!(out.metrics.thresholds_met);
    }

    #[test]
    fn observer_demo_meets_its_oracle() {
        let out = run_observer_demo(&short(Scenario::ObserverDemo)).unwrap();
        assert!(
            out.metrics.observer_max_error.unwrap() < 1e-6,
            "{:?}",
            out.metrics
        );
    }
}
