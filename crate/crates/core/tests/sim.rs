use flapsim_core::config::Config;
use flapsim_core::sim::{run_scenario, Scenario, TrajectoryLog};

fn config(scenario: Scenario) -> Config {
    let mut c = Config::default();
    c.sim.scenario = scenario;
    c
}

fn short(scenario: Scenario) -> Config {
    let mut c = config(scenario);
    c.sim.duration = 1.0;
    c.sim.drop_duration = 0.5;
    c.sim.transient = 0.5;
    c.sim.oracle_duration = 0.1;
    c
}

fn bits(log: &TrajectoryLog) -> Vec<Vec<u64>> {
    log.rows
        .iter()
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect()
}

#[test]
fn same_seed_gives_bit_identical_logs() {
    let mut c = short(Scenario::Hover);
    c.sim.measurement_noise = 1e-3;
    c.sim.seed = 11;
    let a = run_scenario(&c).unwrap();
    let b = run_scenario(&c).unwrap();
    assert_eq!(a.logs.len(), b.logs.len());
    for ((na, la), (nb, lb)) in a.logs.iter().zip(&b.logs) {
        assert_eq!(na, nb);
        assert_eq!(la.columns, lb.columns);
        assert_eq!(bits(la), bits(lb));
    }
    assert_eq!(a.metrics, b.metrics);

    c.sim.seed = 12;
    let other = run_scenario(&c).unwrap();
    assert_ne!(bits(&a.logs[0].1), bits(&other.logs[0].1));
}

#[test]
fn every_scenario_writes_a_fixed_schema_with_increasing_time() {
    for s in Scenario::ALL {
        let c = short(s);
        let first = run_scenario(&c).unwrap();
        let again = run_scenario(&c).unwrap();
        assert!(first.failure.is_none(), "{s}: {:?}", first.failure);
        assert!(!first.logs.is_empty(), "{s}");
        for ((_, log), (_, log2)) in first.logs.iter().zip(&again.logs) {
            assert_eq!(log.columns[0], "time");
            assert_eq!(log.columns, log2.columns);
            assert!(log.rows.iter().all(|r| r.len() == log.columns.len()));
            let t = log.column("time").unwrap();
            assert!(
                t.windows(2).all(|w| w[1] > w[0]),
                "{s}: time not increasing"
            );
        }
    }
}

#[test]
fn written_logs_read_back_exactly() {
    let mut c = short(Scenario::Hover);
    c.sim.measurement_noise = 1e-3;
    let out = run_scenario(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (name, log) in &out.logs {
        let path = dir.path().join(format!("{name}.csv"));
        log.save(&path, &format!("config {}", c.hash())).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(&format!("# config {}", c.hash())));
        let back = TrajectoryLog::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.columns, log.columns);
        assert_eq!(bits(&back), bits(log));
    }
}

#[test]
fn motors_off_system_descends() {
    let c = config(Scenario::FreeFlight);
    let out = run_scenario(&c).unwrap();
    assert!(out.failure.is_none());
    assert!(out.metrics.thresholds_met);
    let log = &out.logs[0].1;
    let t = log.column("time").unwrap();
    let z = log.column("p_g_z").unwrap();
    // after the band transient, sampled every 0.1 s
    let picks: Vec<f64> = t
        .iter()
        .zip(&z)
        .filter(|(t, _)| **t >= 0.2 && ((**t * 10.0).round() - **t * 10.0).abs() < 1e-6)
        .map(|(_, z)| *z)
        .collect();
    assert!(picks.len() >= 5);
    assert!(picks.windows(2).all(|w| w[1] < w[0]), "{picks:?}");
}

#[test]
fn conservative_drop_keeps_energy() {
    let mut c = config(Scenario::FreeFlight);
    c.sim.drop_duration = 10.0;
    c.sim.aero_enabled = false;
    c.dynamics.aerobat.flapping_frequency = 0.0;
    c.dynamics.suspension.damping = 0.0;
    let out = run_scenario(&c).unwrap();
    let drift = out
        .metrics
        .energy_drift
        .expect("conservative run reports drift");
    assert!(drift <= 1e-4, "energy drift {drift}");
    assert!(out.metrics.thresholds_met);
}

#[test]
fn jittered_wingtip_stays_close_to_the_cycle() {
    let mut c = config(Scenario::WingtipTrace);
    c.sim.phase_jitter = 0.01;
    c.sim.seed = 5;
    let out = run_scenario(&c).unwrap();
    let dev = out.metrics.wingtip_deviation.unwrap();
    assert!(dev > 0.0 && dev <= 0.05, "deviation {dev}");
}

#[test]
fn zero_amplitude_drive_traces_a_point() {
    let mut c = config(Scenario::WingtipTrace);
    c.kinematics.design.crank_radius_shoulder = 0.0;
    c.kinematics.design.crank_radius_elbow = 0.0;
    let out = run_scenario(&c).unwrap();
    let log = &out.logs[0].1;
    for col in ["tip_y", "tip_z"] {
        let v = log.column(col).unwrap();
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-12), "{col} moves");
    }
}

#[test]
fn aero_step_matches_oracle_in_both_modes() {
    for mode in ["classical", "paper-literal"] {
        let mut c = config(Scenario::AeroStep);
        c.aero.wagner.mode = mode.parse().unwrap();
        let out = run_scenario(&c).unwrap();
        let err = out.metrics.aero_rms_error.unwrap();
        assert!(err <= 0.01, "{mode}: {err}");
        let log = &out.logs[0].1;
        assert!(log.column("max_rel_error").is_some());
    }
}

#[test]
fn settled_hover_stays_near_the_setpoint() {
    let mut c = config(Scenario::Hover);
    c.sim.duration = 4.0;
    c.sim.transient = 3.0;
    let out = run_scenario(&c).unwrap();
    let m = &out.metrics;
    assert!(m.rms_position_error.unwrap() < 0.02);
    assert!(m.rms_attitude_error_deg.unwrap() < 5.0);
    assert!(m.saturated_fraction.unwrap() <= 1.0);
}
