#![allow(dead_code)]

use std::io::Write;

use byzcusum::adversary::AttackerSpec;
use byzcusum::cusum::StoppingRecord;
use byzcusum::experiment::{run_trials, ExperimentConfig};
use byzcusum::fusion::{FusionKind, FusionRule};
use byzcusum::signal::{ChangeTime, ContinuousModel, DiscreteModel, SignalModel};
use byzcusum::sim::{Scenario, SimOptions};

pub fn config(text: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::parse(text).expect("test config parses");
    cfg.validate().expect("test config is valid");
    cfg
}

/// Writes straight to the process stdout so the line shows up even when the
/// harness captures test output.
pub fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[acceptance] {criterion:<34} {verdict}  {detail}");
}

/// Stop times of one honest detector over one stream.
pub fn single_sensor_times(model: SignalModel, h: f64, trials: u64, max_steps: u64, seed: u64) -> Vec<f64> {
    let rule = FusionRule::new(FusionKind::Centralized, h, 1).unwrap();
    let scenario = Scenario::new(
        model,
        rule,
        &AttackerSpec::none(),
        max_steps,
        seed,
        SimOptions::default(),
    )
    .unwrap();
    let records = run_trials(&scenario, trials, false).unwrap();
    assert!(records.iter().all(|r| r.stopped), "single-sensor run hit the step cap");
    records.iter().map(StoppingRecord::alarm_time).collect()
}

pub fn continuous(mu: f64, dt: f64, change: ChangeTime) -> SignalModel {
    SignalModel::Continuous(ContinuousModel::new(mu, dt, change).unwrap())
}

pub fn gaussian_shift(change: ChangeTime) -> DiscreteModel {
    DiscreteModel::gaussian(0.0, 1.0, 1.0, change).unwrap()
}

/// Empirical `P(T > t)` and its standard error.
pub fn survival_at(times: &[f64], t: f64) -> (f64, f64) {
    let n = times.len() as f64;
    let p = times.iter().filter(|&&x| x > t).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}
