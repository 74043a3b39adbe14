//! Pipeline-level invariants at small trial counts.

mod common;

use byzcusum::adversary::{AttackerSpec, Metric, Strategy};
use byzcusum::analytics::arl_centralized_closed_form;
use byzcusum::experiment::{run_point, run_trials, scenario, MetricEstimate};
use byzcusum::fusion::{kth_order_statistic, FusionKind, FusionRule};
use byzcusum::signal::ChangeTime;
use byzcusum::sim::{Scenario, SimOptions};

use common::{config, continuous};

fn scenario_for(mu: f64, dt: f64, rule: FusionRule, attacker: &AttackerSpec, seed: u64) -> Scenario {
    Scenario::new(
        continuous(mu, dt, ChangeTime::Never),
        rule,
        attacker,
        1_000_000,
        seed,
        SimOptions::default(),
    )
    .unwrap()
}

#[test]
fn rescaling_drift_and_step_rescales_time() {
    // μ → 2μ with dt → dt/4 (and attack drifts doubled with μ) leaves every
    // per-step increment unchanged.
    let rule = FusionRule::new(FusionKind::SECOND_ALARM, 3.0, 9).unwrap();
    let drift = |slope| AttackerSpec::last_sensor(9, Strategy::LinearDrift { slope }).unwrap();
    let base = scenario_for(1.0, 0.01, rule, &drift(2.0), 1);
    let fast = scenario_for(2.0, 0.0025, rule, &drift(4.0), 1);
    for trial in 0..200 {
        let (a, b) = (
            base.run_trial(trial).unwrap().fused,
            fast.run_trial(trial).unwrap().fused,
        );
        assert!(a.stopped && b.stopped);
        assert!(
            (a.stop_time / 4.0 - b.stop_time).abs() < 1e-9,
            "trial {trial}: {} vs {}",
            a.stop_time,
            b.stop_time
        );
    }
}

#[test]
fn stop_times_grow_with_threshold_path_by_path() {
    let spec = AttackerSpec::last_sensor(9, Strategy::LinearDrift { slope: 3.0 }).unwrap();
    for kind in [
        FusionKind::Centralized,
        FusionKind::SECOND_ALARM,
        FusionKind::TWO_OF_THREE,
    ] {
        let runs: Vec<Scenario> = [2.0, 2.5, 3.5]
            .iter()
            .map(|&h| scenario_for(1.0, 0.01, FusionRule::new(kind, h, 9).unwrap(), &spec, 5))
            .collect();
        for trial in 0..200 {
            let times: Vec<f64> = runs
                .iter()
                .map(|s| s.run_trial(trial).unwrap().fused.stop_time)
                .collect();
            assert!(
                times.windows(2).all(|w| w[0] <= w[1]),
                "{kind:?} trial {trial}: {times:?}"
            );
        }
    }
}

#[test]
fn fused_time_is_the_order_statistic_of_detector_times() {
    let spec = AttackerSpec::new([2, 6], Strategy::LinearDrift { slope: 4.0 }, 2).unwrap();
    for k in [2, 3, 4] {
        let rule = FusionRule::new(FusionKind::KthAlarm(k), 2.5, 9).unwrap();
        let s = scenario_for(1.0, 0.01, rule, &spec, 9);
        for trial in 0..100 {
            let full = s.run_trial_to_completion(trial).unwrap();
            let times: Vec<f64> = full.detectors.iter().map(|r| r.alarm_time()).collect();
            let mut sorted = times.clone();
            sorted.sort_by(f64::total_cmp);
            assert_eq!(full.fused.stop_time, sorted[k - 1]);
            assert_eq!(
                s.run_trial(trial).unwrap().fused.stop_time,
                kth_order_statistic(&times, k).unwrap().value
            );
        }
    }
}

fn estimate(cfg_text: &str, kind: FusionKind, h: f64) -> (MetricEstimate, MetricEstimate) {
    let p = run_point(&config(cfg_text), kind, h).unwrap();
    (p.arl, p.delay)
}

fn agree(a: &MetricEstimate, b: &MetricEstimate) -> bool {
    (a.mean - b.mean).abs() <= 4.0 * a.std_error.hypot(b.std_error)
}

#[test]
fn compromised_position_does_not_matter_in_distribution() {
    let base = "thresholds = [3.0]\ntrials = 3000\nseed = 21\nattacker = \"linear_drift\"\nattack_slope = 3.0";
    for kind in [FusionKind::SECOND_ALARM, FusionKind::TWO_OF_THREE] {
        let first = estimate(&format!("{base}\ncompromised = [1]"), kind, 3.0);
        let last = estimate(&format!("{base}\ncompromised = [9]"), kind, 3.0);
        assert!(agree(&first.0, &last.0), "{kind:?} ARL {:?} vs {:?}", first.0, last.0);
        assert!(agree(&first.1, &last.1), "{kind:?} delay {:?} vs {:?}", first.1, last.1);
    }
}

#[test]
fn later_change_does_not_lengthen_delay() {
    let base = "thresholds = [3.0]\ntrials = 3000\nseed = 22";
    for kind in [FusionKind::SECOND_ALARM, FusionKind::TWO_OF_THREE] {
        let (_, at_zero) = estimate(base, kind, 3.0);
        let (_, later) = estimate(&format!("{base}\nchange_time = 5.0"), kind, 3.0);
        assert!(
            later.mean <= at_zero.mean + 3.0 * at_zero.std_error.hypot(later.std_error),
            "{kind:?}: {} > {}",
            later.mean,
            at_zero.mean
        );
    }
}

#[test]
fn halving_the_step_keeps_arl_within_noise() {
    let base = "scheme = \"centralized\"\nattacker = \"honest\"\nthresholds = [3.0]\ntrials = 4000\nseed = 23";
    let mut estimates = Vec::new();
    for dt in [0.01, 0.005] {
        let cfg = config(&format!("{base}\ndt = {dt}"));
        let s = scenario(&cfg, FusionKind::Centralized, 3.0, Metric::Arl).unwrap();
        let records = run_trials(&s, cfg.trials, false).unwrap();
        estimates.push(MetricEstimate::from_records(Metric::Arl, 3.0, &records, 0.0));
    }
    let (a, b) = (&estimates[0], &estimates[1]);
    let diff = (a.mean - b.mean).abs();
    assert!(diff < 3.0 * a.std_error.hypot(b.std_error), "{} vs {}", a.mean, b.mean);
    let exact = arl_centralized_closed_form(3.0, 9, 1.0);
    assert!((b.mean - exact).abs() < 3.0 * b.std_error, "{} vs {exact}", b.mean);
}

#[test]
fn grid_crossing_is_biased_late() {
    // Checking only at grid points misses excursions between them; the
    // bridge correction removes most of that bias.
    let base = "scheme = \"centralized\"\nattacker = \"honest\"\nthresholds = [3.0]\ntrials = 3000\nseed = 24";
    let delay = |extra: &str| {
        run_point(&config(&format!("{base}\n{extra}")), FusionKind::Centralized, 3.0)
            .unwrap()
            .delay
    };
    let grid = delay("crossing = \"grid\"\ndt = 0.05");
    let bridge = delay("crossing = \"bridge\"\ndt = 0.05");
    assert!(grid.mean > bridge.mean);
}

#[test]
fn signal_level_worst_case_matches_fusion_level() {
    let base = "scheme = [\"second_alarm\", \"group_wise\"]\nthresholds = [3.0]\ntrials = 500\nseed = 25";
    for kind in [FusionKind::SECOND_ALARM, FusionKind::TWO_OF_THREE] {
        let (arl, delay) = estimate(base, kind, 3.0);
        let (arl_s, delay_s) = estimate(&format!("{base}\nsignal_level_worst_case = true"), kind, 3.0);
        assert!(
            (arl.mean - arl_s.mean).abs() <= 0.01,
            "{kind:?}: {} vs {}",
            arl.mean,
            arl_s.mean
        );
        assert!(
            (delay.mean - delay_s.mean).abs() <= 0.01,
            "{kind:?}: {} vs {}",
            delay.mean,
            delay_s.mean
        );
    }
}
