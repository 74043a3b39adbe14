//! Monte Carlo estimation of ARL and delay, threshold sweeps and delay
//! ratios against an honest baseline.
//!
//! ARL is estimated with no change and the attack that shortens run length;
//! delay with the change at `change_time` and the attack that stalls
//! detection. Each metric draws from its own seed, derived from the master
//! seed only, so runs at different thresholds, schemes or attacks share
//! random numbers.

use rayon::prelude::*;

use crate::adversary::{AttackerSpec, Metric, Strategy};
use crate::analytics::{
    arl_centralized_closed_form, calibrate_centralized_threshold, delay_centralized_closed_form,
    estimate_renewal_constants, prop1_bounds, theorem1_delay_bound, theorem2_delay_bound, theorem3_delay_bound,
    theorem4_delay_bound, RenewalConstants, RenewalOptions,
};
use crate::cusum::StoppingRecord;
use crate::error::{Error, Result};
use crate::fusion::{FusionKind, FusionRule};
use crate::rng::mix;
use crate::signal::{ChangeTime, SignalModel};
use crate::sim::Scenario;
use crate::stats::mean_se;

use super::config::{scheme_name, ExperimentConfig};
use super::output::{CurveRow, RatioRow};

const ARL_TAG: u64 = 1;
const DELAY_TAG: u64 = 2;
const RENEWAL_TAG: u64 = 3;
const BASELINE_TAG: u64 = 4;

/// Estimates flagged as biased when more than this fraction of trials hit
/// the step cap.
pub const CENSOR_LIMIT: f64 = 0.01;

/// Floor for the derived step cap.
const MIN_MAX_STEPS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub metric: Metric,
    /// Mean over uncensored trials; infinite if every trial was censored.
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub censored: u64,
    pub threshold: f64,
}

impl MetricEstimate {
    /// Summarizes fused records. Delay samples are `(T − change)⁺`.
    pub fn from_records(metric: Metric, threshold: f64, records: &[StoppingRecord], change: f64) -> Self {
        let samples: Vec<f64> = records
            .iter()
            .filter(|r| r.stopped)
            .map(|r| match metric {
                Metric::Arl => r.stop_time,
                Metric::Delay => (r.stop_time - change).max(0.0),
            })
            .collect();
        let censored = (records.len() - samples.len()) as u64;
        let (mean, std_error) = if samples.is_empty() {
            (f64::INFINITY, f64::INFINITY)
        } else {
            mean_se(&samples)
        };
        Self {
            metric,
            mean,
            std_error,
            trials: records.len() as u64,
            censored,
            threshold,
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.trials as f64
    }

    /// True when censoring may bias the mean.
    pub fn flagged(&self) -> bool {
        self.censored_fraction() > CENSOR_LIMIT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub scheme: FusionKind,
    pub threshold: f64,
    pub arl: MetricEstimate,
    pub delay: MetricEstimate,
}

/// Step cap: 50 times the no-change ARL of the scheme's smallest detector,
/// in steps, with a floor.
pub fn default_max_steps(cfg: &ExperimentConfig, scheme: FusionKind, threshold: f64) -> Result<u64> {
    let rule = FusionRule::new(scheme, threshold, cfg.sensors)?;
    let scope = rule.scopes().iter().map(|r| r.len()).min().unwrap_or(1);
    let arl_steps = match cfg.signal_model(ChangeTime::Never)? {
        SignalModel::Continuous(m) => arl_centralized_closed_form(threshold, scope, m.mu()) / m.dt(),
        SignalModel::Discrete(m) => {
            let drift = scope as f64 * m.kl_divergence()?;
            // Gaussian-walk overshoot correction, R ≈ exp(−0.583 σ).
            let r = (-0.583 * (2.0 * drift).sqrt()).exp();
            threshold.exp() / (r * r * drift) + threshold / drift
        }
    };
    Ok(((50.0 * arl_steps).ceil() as u64).max(MIN_MAX_STEPS))
}

fn max_steps(cfg: &ExperimentConfig, scheme: FusionKind, threshold: f64) -> Result<u64> {
    if cfg.max_steps > 0 {
        Ok(cfg.max_steps)
    } else {
        default_max_steps(cfg, scheme, threshold)
    }
}

/// Runs `f` on a pool sized by `cfg.threads` (zero: rayon's default).
pub fn in_pool<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    if cfg.threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Fused records of trials `0..trials`, in trial order regardless of
/// parallelism.
pub fn run_trials(scenario: &Scenario, trials: u64, serial: bool) -> Result<Vec<StoppingRecord>> {
    if serial {
        (0..trials).map(|t| scenario.run_trial(t).map(|o| o.fused)).collect()
    } else {
        (0..trials)
            .into_par_iter()
            .map(|t| scenario.run_trial(t).map(|o| o.fused))
            .collect()
    }
}

fn attacker_for(cfg: &ExperimentConfig, metric: Metric) -> Result<AttackerSpec> {
    let spec = cfg.attacker_spec()?;
    Ok(spec.with_strategy(cfg.attack_mode()?.resolve(metric)))
}

/// Scenario for one metric of one point.
pub fn scenario(cfg: &ExperimentConfig, scheme: FusionKind, threshold: f64, metric: Metric) -> Result<Scenario> {
    let (change, tag) = match metric {
        Metric::Arl => (ChangeTime::Never, ARL_TAG),
        Metric::Delay => (ChangeTime::At(cfg.change_time), DELAY_TAG),
    };
    let rule = FusionRule::new(scheme, threshold, cfg.sensors)?;
    Scenario::new(
        cfg.signal_model(change)?,
        rule,
        &attacker_for(cfg, metric)?,
        max_steps(cfg, scheme, threshold)?,
        mix(cfg.seed, tag),
        cfg.sim_options()?,
    )
}

/// ARL and delay of `scheme` at `threshold`.
pub fn run_point(cfg: &ExperimentConfig, scheme: FusionKind, threshold: f64) -> Result<PointResult> {
    let serial = cfg.threads == 1;
    let arl = run_trials(&scenario(cfg, scheme, threshold, Metric::Arl)?, cfg.trials, serial)?;
    let delay = run_trials(&scenario(cfg, scheme, threshold, Metric::Delay)?, cfg.trials, serial)?;
    Ok(PointResult {
        scheme,
        threshold,
        arl: MetricEstimate::from_records(Metric::Arl, threshold, &arl, 0.0),
        delay: MetricEstimate::from_records(Metric::Delay, threshold, &delay, cfg.change_time),
    })
}

/// Renewal constants needed by the discrete-time bounds, per detector scope.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteConstants {
    pub single: Option<RenewalConstants>,
    pub group: Option<RenewalConstants>,
}

fn discrete_constants(cfg: &ExperimentConfig, schemes: &[FusionKind]) -> Result<DiscreteConstants> {
    let none = DiscreteConstants {
        single: None,
        group: None,
    };
    if cfg.is_continuous() || cfg.renewal_trials == 0 {
        return Ok(none);
    }
    let SignalModel::Discrete(model) = cfg.signal_model(ChangeTime::At(0.0))? else {
        return Ok(none);
    };
    let opts = RenewalOptions {
        trials: cfg.renewal_trials,
        seed: mix(cfg.seed, RENEWAL_TAG),
        ..RenewalOptions::default()
    };
    let single = schemes
        .contains(&FusionKind::SECOND_ALARM)
        .then(|| estimate_renewal_constants(&model, 1, &opts))
        .transpose()?;
    let group_size = (cfg.sensors as f64 / 3.0).round().max(1.0) as usize;
    let group = schemes
        .contains(&FusionKind::TWO_OF_THREE)
        .then(|| {
            let opts = RenewalOptions {
                seed: mix(opts.seed, group_size as u64),
                ..opts.clone()
            };
            estimate_renewal_constants(&model, group_size, &opts)
        })
        .transpose()?;
    Ok(DiscreteConstants { single, group })
}

/// The analytic delay curve value paired with a measured point, where the
/// theory provides one:
///
/// * centralized, no attack: the exact delay at the threshold;
/// * centralized under the drift attack with slope `N`: the delay lower bound;
/// * second-alarm and 2-of-3 group schemes: the delay bound at the measured
///   ARL (discrete time needs renewal constants).
pub fn bound_delay(cfg: &ExperimentConfig, point: &PointResult, constants: &DiscreteConstants) -> Result<Option<f64>> {
    let n = cfg.sensors;
    let arl = point.arl.mean;
    let arl_ok = arl.is_finite() && arl > 1.0;
    let strategy = if cfg.attacker_spec()?.compromised().is_empty() {
        Strategy::Honest
    } else {
        cfg.attack_mode()?.resolve(Metric::Delay)
    };
    let bound = match (cfg.signal_model(ChangeTime::At(0.0))?, point.scheme) {
        (SignalModel::Continuous(m), FusionKind::Centralized) => match strategy {
            Strategy::Honest => Some(delay_centralized_closed_form(point.threshold, n, m.mu())),
            Strategy::LinearDrift { slope } if slope == n as f64 => {
                Some(prop1_bounds(point.threshold, n, m.mu()).delay_lower)
            }
            _ => None,
        },
        (SignalModel::Continuous(m), FusionKind::SECOND_ALARM) if arl_ok => Some(theorem1_delay_bound(arl, n, m.mu())),
        (SignalModel::Continuous(m), FusionKind::TWO_OF_THREE) if arl_ok => Some(theorem2_delay_bound(arl, n, m.mu())),
        (SignalModel::Discrete(m), FusionKind::SECOND_ALARM) if arl_ok => match &constants.single {
            Some(c) => Some(theorem3_delay_bound(arl, &m, n, c)?),
            None => None,
        },
        (SignalModel::Discrete(m), FusionKind::TWO_OF_THREE) if arl_ok => match &constants.group {
            Some(c) => Some(theorem4_delay_bound(arl, &m, n, c)?),
            None => None,
        },
        _ => None,
    };
    Ok(bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<CurveRow>,
    pub points: Vec<PointResult>,
    pub constants: DiscreteConstants,
}

impl SweepResult {
    /// Any estimate biased by censoring.
    pub fn flagged(&self) -> bool {
        self.points.iter().any(|p| p.arl.flagged() || p.delay.flagged())
    }

    /// Renewal constants that did not settle.
    pub fn unconverged(&self) -> bool {
        [&self.constants.single, &self.constants.group]
            .into_iter()
            .flatten()
            .any(|c| !c.converged)
    }

    /// `(ARL, delay)` pairs of one scheme, in threshold order.
    pub fn curve(&self, scheme: FusionKind) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.scheme == scheme)
            .map(|p| (p.arl.mean, p.delay.mean))
            .collect()
    }
}

/// Evaluates `thresholds` (all of the config's by default) for every scheme.
pub fn run_thresholds(cfg: &ExperimentConfig, thresholds: &[f64]) -> Result<SweepResult> {
    let schemes = cfg.schemes()?;
    in_pool(cfg, || {
        let constants = discrete_constants(cfg, &schemes)?;
        let mut rows = Vec::new();
        let mut points = Vec::new();
        for &scheme in &schemes {
            for &h in thresholds {
                let point = run_point(cfg, scheme, h)?;
                rows.push(CurveRow {
                    scheme: scheme_name(scheme),
                    model: cfg.model.clone(),
                    n: cfg.sensors,
                    threshold: h,
                    arl_mean: point.arl.mean,
                    arl_se: point.arl.std_error,
                    delay_mean: point.delay.mean,
                    delay_se: point.delay.std_error,
                    bound_delay: bound_delay(cfg, &point, &constants)?,
                    censored_arl: point.arl.censored,
                    censored_delay: point.delay.censored,
                    trials: cfg.trials,
                    seed: cfg.seed,
                });
                points.push(point);
            }
        }
        Ok(SweepResult {
            rows,
            points,
            constants,
        })
    })?
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_thresholds(cfg, &cfg.thresholds)
}

/// Delay on a measured curve at `arl`, interpolating linearly in `ln ARL`.
/// `None` outside the measured ARL range.
pub fn delay_at_arl(curve: &[(f64, f64)], arl: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|(a, d)| *a > 0.0 && a.is_finite() && d.is_finite())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() || arl < pts[0].0 || arl > pts[pts.len() - 1].0 {
        return None;
    }
    if pts.len() == 1 {
        return Some(pts[0].1);
    }
    let i = pts.partition_point(|p| p.0 < arl).clamp(1, pts.len() - 1);
    let ((a0, d0), (a1, d1)) = (pts[i - 1], pts[i]);
    if a1 == a0 {
        return Some(d0);
    }
    let w = (arl.ln() - a0.ln()) / (a1.ln() - a0.ln());
    Some(d0 + w * (d1 - d0))
}

/// Asymptotic ceiling on the delay ratio against `N − 1` honest sensors.
pub fn ratio_limit(scheme: FusionKind, n: usize) -> Option<f64> {
    let n = n as f64;
    match scheme {
        FusionKind::SECOND_ALARM => Some(2.0 * (n - 1.0)),
        FusionKind::TWO_OF_THREE => Some(6.0 * (n - 1.0) / n),
        _ => None,
    }
}

/// Delay of the honest `N − 1`-sensor centralized detector at the same ARL
/// as `point`. The baseline threshold comes from the closed-form ARL.
pub fn baseline_delay(cfg: &ExperimentConfig, arl: f64) -> Result<(f64, MetricEstimate)> {
    let SignalModel::Continuous(model) = cfg.signal_model(ChangeTime::At(cfg.change_time))? else {
        return Err(Error::config("delay ratios need the continuous model"));
    };
    let n = cfg.sensors - 1;
    let nu = calibrate_centralized_threshold(arl, n, model.mu())?;
    let rule = FusionRule::new(FusionKind::Centralized, nu, n)?;
    let steps = if cfg.max_steps > 0 {
        cfg.max_steps
    } else {
        ((50.0 * arl / model.dt()).ceil() as u64).max(MIN_MAX_STEPS)
    };
    let scenario = Scenario::new(
        SignalModel::Continuous(model),
        rule,
        &AttackerSpec::none(),
        steps,
        mix(cfg.seed, BASELINE_TAG),
        cfg.sim_options()?,
    )?;
    let records = run_trials(&scenario, cfg.trials, cfg.threads == 1)?;
    Ok((
        nu,
        MetricEstimate::from_records(Metric::Delay, nu, &records, cfg.change_time),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub sweep: SweepResult,
    pub rows: Vec<RatioRow>,
    pub baselines: Vec<MetricEstimate>,
}

impl RatioReport {
    pub fn flagged(&self) -> bool {
        self.sweep.flagged() || self.baselines.iter().any(MetricEstimate::flagged)
    }
}

/// Sweeps the configured schemes and divides each delay by the honest
/// `N − 1`-sensor baseline's delay at the same measured ARL.
pub fn delay_ratio_report(cfg: &ExperimentConfig) -> Result<RatioReport> {
    if !cfg.is_continuous() {
        return Err(Error::config("delay ratios need the continuous model"));
    }
    let sweep = run_sweep(cfg)?;
    let (rows, baselines) = in_pool(cfg, || -> Result<_> {
        let mut rows = Vec::new();
        let mut baselines = Vec::new();
        for p in &sweep.points {
            let (nu, base) = baseline_delay(cfg, p.arl.mean)?;
            rows.push(RatioRow {
                scheme: scheme_name(p.scheme),
                model: cfg.model.clone(),
                n: cfg.sensors,
                threshold: p.threshold,
                arl_mean: p.arl.mean,
                delay_mean: p.delay.mean,
                baseline_threshold: nu,
                baseline_delay_mean: base.mean,
                baseline_delay_se: base.std_error,
                baseline_delay_analytic: delay_centralized_closed_form(nu, cfg.sensors - 1, cfg.mu),
                ratio: p.delay.mean / base.mean,
                ratio_limit: ratio_limit(p.scheme, cfg.sensors),
            });
            baselines.push(base);
        }
        Ok((rows, baselines))
    })??;
    Ok(RatioReport { sweep, rows, baselines })
}
