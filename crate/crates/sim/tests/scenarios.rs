use std::path::PathBuf;
use std::process::Command;

use usv_core::control::ControllerKind;
use usv_sim::config::SensorConfig;
use usv_sim::log::{read_records, Outcome, Record};
use usv_sim::offline::{certify_log, output_path};
use usv_sim::{run_scenario, ScenarioConfig};

const LINE: &str = r#"
name = "short-line"
seed = 3
duration = 20.0

[estimator]
window = 10
max_iterations = 10

[certify]
horizon = 10
gamma = 3.0

[[vehicles]]
name = "usv"
start = { x = 0.0, y = 2.0, heading_deg = 0.0, speed = 1.0 }

[vehicles.mission]
kind = "line"
start = [0.0, 0.0]
end = [200.0, 0.0]
speed = 1.0

[[disturbances]]
name = "left-half"
kind = "fault"
trigger = { kind = "time", at = 5.0 }
fault = { thrust_factor_l = 0.5 }
"#;

fn line() -> ScenarioConfig {
    ScenarioConfig::from_toml(LINE).unwrap()
}

fn scenario_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

#[test]
fn identical_config_gives_identical_bytes() {
    let cfg = line();
    let a = run_scenario(&cfg, ControllerKind::Mrac).unwrap();
    let b = run_scenario(&cfg, ControllerKind::Mrac).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
    assert_eq!(a.summary_json(), b.summary_json());
}

#[test]
fn seed_changes_the_noise() {
    let cfg = line();
    let mut other = cfg.clone();
    other.seed += 1;
    let a = run_scenario(&cfg, ControllerKind::LqrPi).unwrap();
    let b = run_scenario(&other, ControllerKind::LqrPi).unwrap();
    assert_ne!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn processes_run_at_their_configured_rates() {
    let cfg = line();
    let log = run_scenario(&cfg, ControllerKind::LqrPi).unwrap();
    let s = &log.summary;
    assert_eq!(s.outcome, Outcome::Timeout);
    let inv = &s.invocations;
    // 20 s at the default rates.
    assert_eq!(inv.base, 800);
    assert_eq!(inv.helm, 80);
    assert_eq!(inv.controller, 200);
    assert_eq!(inv.estimator, 200);
    assert_eq!(inv.certify, 200);
    let ticks = log.records.iter().filter(|r| matches!(r, Record::Tick { .. })).count();
    assert_eq!(ticks, 200);
}

#[test]
fn fault_fires_once_at_its_trigger() {
    let log = run_scenario(&line(), ControllerKind::Mrac).unwrap();
    let onsets: Vec<f64> = log
        .records
        .iter()
        .filter_map(|r| match r {
            Record::Event { t, name, .. } if name == "disturbance-onset" => Some(*t),
            _ => None,
        })
        .collect();
    assert_eq!(onsets.len(), 1);
    assert!((onsets[0] - 5.0).abs() < 1e-9);
    for r in &log.records {
        if let Record::Tick { t, faults, .. } = r {
            assert_eq!(faults.contains(&"left-half".to_string()), *t >= 5.0, "at {t}");
        }
    }
}

#[test]
fn noiseless_trackline_converges_onto_the_line() {
    let mut cfg = line();
    cfg.sensors = SensorConfig::noiseless();
    cfg.disturbances.clear();
    cfg.estimator = None;
    cfg.certify = None;
    cfg.duration = 60.0;
    for controller in [ControllerKind::Pid, ControllerKind::LqrPi, ControllerKind::Mrac] {
        let log = run_scenario(&cfg, controller).unwrap();
        let last = log
            .records
            .iter()
            .rev()
            .find_map(|r| match r {
                Record::Tick { errors, .. } => Some(errors.position),
                _ => None,
            })
            .unwrap();
        assert!(last.abs() < 0.2, "{controller}: final cross-track {last}");
    }
}

#[test]
fn invalid_rates_are_rejected() {
    let text = format!("{LINE}\n[rates]\nbase = 40\nhelm = 3\n");
    assert!(ScenarioConfig::from_toml(&text).is_err());
}

#[test]
fn unknown_keys_are_rejected() {
    let text = LINE.replace("seed = 3", "seed = 3\nsede = 4");
    assert!(ScenarioConfig::from_toml(&text).is_err());
}

#[test]
fn offline_certify_covers_every_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = line();
    cfg.duration = 5.0;
    run_scenario(&cfg, ControllerKind::LqrPi).unwrap().write_dir(dir.path()).unwrap();
    let log = dir.path().join("run.jsonl");
    let estimates = read_records(&log)
        .unwrap()
        .iter()
        .filter(|r| matches!(r, Record::Estimate { .. }))
        .count();
    // The window has to fill before the first estimate.
    assert!(estimates > 30);
    let report = certify_log(&log, 5, 2.0).unwrap();
    assert_eq!(report.output, output_path(&log));
    assert_eq!(report.estimates, estimates);
    assert_eq!(report.certified, estimates);
    assert_eq!(report.skipped, 0);
    let records = read_records(&report.output).unwrap();
    let certs: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            Record::Certify { horizon, gamma, lo, hi, .. } => Some((*horizon, *gamma, lo.len(), hi.len())),
            _ => None,
        })
        .collect();
    assert_eq!(certs.len(), estimates);
    assert!(certs.iter().all(|c| *c == (5, 2.0, 5, 5)));
    assert!(certify_log(&log, 0, 2.0).is_err());
    assert!(certify_log(&log, 5, -1.0).is_err());
}

#[test]
fn pid_estimates_are_skipped_offline() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = line();
    cfg.duration = 2.0;
    run_scenario(&cfg, ControllerKind::Pid).unwrap().write_dir(dir.path()).unwrap();
    let report = certify_log(&dir.path().join("run.jsonl"), 5, 2.0).unwrap();
    assert!(report.estimates > 0);
    assert_eq!(report.skipped, report.estimates);
    assert_eq!(report.certified, 0);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_usv-sim")).args(args).output().unwrap()
}

#[test]
fn strict_flag_turns_a_halt_into_an_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let canal = scenario_file("canal");
    let (canal, out) = (canal.to_str().unwrap(), dir.path().to_str().unwrap());
    let lax = cli(&["run", "--scenario", canal, "--controller", "pid", "--out", out]);
    assert!(lax.status.success());
    assert!(String::from_utf8_lossy(&lax.stdout).contains("halt"));
    let strict = cli(&["--strict", "run", "--scenario", canal, "--controller", "pid", "--out", out]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(dir.path().join("run.jsonl").exists());
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn cli_reports_bad_input() {
    let missing = cli(&["run", "--scenario", "/nonexistent.toml", "--out", "/tmp/none"]);
    assert_eq!(missing.status.code(), Some(1));
    let bad = cli(&["run", "--scenario", "x.toml", "--controller", "fuzzy", "--out", "/tmp/none"]);
    assert!(!bad.status.success());
}

#[test]
fn cli_gains_prints_both_columns() {
    let out = cli(&["gains"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("published") && text.contains("synthesized"));
    assert!(text.contains("k_r_p"));
}
