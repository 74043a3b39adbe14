//! Experiment configuration: a flat TOML file, resolved against defaults and
//! validated once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversary::{AttackMode, AttackerSpec, Strategy};
use crate::cusum::{CrossingMode, MinConvention};
use crate::error::{Error, Result};
use crate::fusion::{FusionKind, FusionRule};
use crate::signal::{ChangeTime, ContinuousModel, DiscreteModel, SignalModel};
use crate::sim::SimOptions;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// The file as written. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    model: Option<String>,
    sensors: Option<usize>,
    mu: Option<f64>,
    dt: Option<f64>,
    pre_mean: Option<f64>,
    post_mean: Option<f64>,
    sd: Option<f64>,
    scheme: Option<OneOrMany>,
    k: Option<usize>,
    attacker: Option<String>,
    attack_slope: Option<f64>,
    compromised: Option<Vec<usize>>,
    n_max: Option<usize>,
    thresholds: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    max_steps: Option<u64>,
    output: Option<PathBuf>,
    crossing: Option<String>,
    min_convention: Option<String>,
    signal_level_worst_case: Option<bool>,
    change_time: Option<f64>,
    threads: Option<usize>,
    renewal_trials: Option<usize>,
}

/// A fully resolved configuration. Serializes back to the same key set, so
/// the echo can be fed to the tool again.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: String,
    pub sensors: usize,
    pub mu: f64,
    pub dt: f64,
    pub pre_mean: f64,
    pub post_mean: f64,
    pub sd: f64,
    pub scheme: Vec<String>,
    pub k: usize,
    pub attacker: String,
    pub attack_slope: f64,
    /// One-based, as in the file.
    pub compromised: Vec<usize>,
    pub n_max: usize,
    pub thresholds: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Zero means "derive from the analytic ARL".
    pub max_steps: u64,
    pub output: PathBuf,
    pub crossing: String,
    pub min_convention: String,
    pub signal_level_worst_case: bool,
    /// Change time used for delay estimates.
    pub change_time: f64,
    /// Zero means one per core.
    pub threads: usize,
    /// Zero disables the discrete-time bounds that need renewal constants.
    pub renewal_trials: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let sensors = raw.sensors.unwrap_or(9);
        let compromised = raw.compromised.unwrap_or_else(|| vec![sensors]);
        let n_max = raw.n_max.unwrap_or(compromised.len());
        let scheme = match raw.scheme {
            None => vec!["second_alarm".to_string()],
            Some(OneOrMany::One(s)) => vec![s],
            Some(OneOrMany::Many(v)) => v,
        };
        let cfg = Self {
            model: raw.model.unwrap_or_else(|| "continuous".into()),
            sensors,
            mu: raw.mu.unwrap_or(1.0),
            dt: raw.dt.unwrap_or(0.01),
            pre_mean: raw.pre_mean.unwrap_or(0.0),
            post_mean: raw.post_mean.unwrap_or(1.0),
            sd: raw.sd.unwrap_or(1.0),
            scheme,
            k: raw.k.unwrap_or((n_max + 1).max(2)),
            attacker: raw.attacker.unwrap_or_else(|| "worst_case".into()),
            attack_slope: raw.attack_slope.unwrap_or(sensors as f64),
            compromised,
            n_max,
            thresholds: raw
                .thresholds
                .ok_or_else(|| Error::config("`thresholds` is required"))?,
            trials: raw.trials.unwrap_or(10_000),
            seed: raw.seed.unwrap_or(0),
            max_steps: raw.max_steps.unwrap_or(0),
            output: raw.output.unwrap_or_else(|| PathBuf::from("out")),
            crossing: raw.crossing.unwrap_or_else(|| "bridge".into()),
            min_convention: raw.min_convention.unwrap_or_else(|| "include_origin".into()),
            signal_level_worst_case: raw.signal_level_worst_case.unwrap_or(false),
            change_time: raw.change_time.unwrap_or(0.0),
            threads: raw.threads.unwrap_or(0),
            renewal_trials: raw.renewal_trials.unwrap_or(20_000),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field and every derived object.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("`trials` must be at least 1"));
        }
        if self.thresholds.is_empty() {
            return Err(Error::config("`thresholds` must not be empty"));
        }
        if self.thresholds.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::config("thresholds must be finite and nonnegative"));
        }
        if self.thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("thresholds must be strictly increasing"));
        }
        if self.scheme.is_empty() {
            return Err(Error::config("`scheme` must name at least one scheme"));
        }
        if !(self.change_time.is_finite() && self.change_time >= 0.0) {
            return Err(Error::config("`change_time` must be finite and nonnegative"));
        }
        if self.renewal_trials != 0 && self.renewal_trials < 10_000 {
            return Err(Error::config("`renewal_trials` must be 0 or at least 10000"));
        }
        self.signal_model(ChangeTime::Never)?;
        self.signal_model(ChangeTime::At(self.change_time))?;
        self.crossing_mode()?;
        self.min_convention()?;
        let attacker = self.attacker_spec()?;
        let attacked = self.attack_mode()? != AttackMode::Fixed(Strategy::Honest) && !attacker.compromised().is_empty();
        if attacked && self.sensors < 3 {
            return Err(Error::config("attack experiments need at least 3 sensors"));
        }
        for kind in self.schemes()? {
            FusionRule::new(kind, self.thresholds[0], self.sensors)?;
            let tolerant = !matches!(kind, FusionKind::Centralized);
            attacker.validate(self.sensors, tolerant)?;
            if let FusionKind::KthAlarm(k) = kind {
                if self.n_max > 0 && k != self.n_max + 1 {
                    return Err(Error::config(format!(
                        "k must be n_max + 1 = {}, got {k}",
                        self.n_max + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolved configuration as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn is_continuous(&self) -> bool {
        self.model == "continuous"
    }

    pub fn signal_model(&self, change_time: ChangeTime) -> Result<SignalModel> {
        match self.model.as_str() {
            "continuous" => Ok(SignalModel::Continuous(ContinuousModel::new(
                self.mu,
                self.dt,
                change_time,
            )?)),
            "discrete" => Ok(SignalModel::Discrete(DiscreteModel::gaussian(
                self.pre_mean,
                self.post_mean,
                self.sd,
                change_time,
            )?)),
            other => Err(Error::config(format!(
                "unknown model `{other}`, expected continuous or discrete"
            ))),
        }
    }

    pub fn schemes(&self) -> Result<Vec<FusionKind>> {
        self.scheme
            .iter()
            .map(|s| match s.as_str() {
                "centralized" => Ok(FusionKind::Centralized),
                "second_alarm" => Ok(FusionKind::SECOND_ALARM),
                "kth_alarm" => Ok(FusionKind::KthAlarm(self.k)),
                "group_wise" => Ok(FusionKind::TWO_OF_THREE),
                other => Err(Error::config(format!(
                    "unknown scheme `{other}`, expected centralized, second_alarm, kth_alarm or group_wise"
                ))),
            })
            .collect()
    }

    pub fn attack_mode(&self) -> Result<AttackMode> {
        Ok(match self.attacker.as_str() {
            "worst_case" => AttackMode::WorstCase,
            "honest" => AttackMode::Fixed(Strategy::Honest),
            "linear_drift" => AttackMode::Fixed(Strategy::LinearDrift {
                slope: self.attack_slope,
            }),
            "immediate_alarm" => AttackMode::Fixed(Strategy::ImmediateAlarm),
            "silent" => AttackMode::Fixed(Strategy::Silent),
            other => return Err(Error::config(format!("unknown attacker `{other}`"))),
        })
    }

    /// The attacker with a placeholder strategy; resolve the mode per metric
    /// and apply it with [`AttackerSpec::with_strategy`].
    pub fn attacker_spec(&self) -> Result<AttackerSpec> {
        if let Some(&bad) = self.compromised.iter().find(|&&i| i == 0 || i > self.sensors) {
            return Err(Error::config(format!(
                "compromised sensor {bad} out of range 1..={}",
                self.sensors
            )));
        }
        let strategy = match self.attack_mode()? {
            AttackMode::Fixed(s) => s,
            AttackMode::WorstCase => Strategy::Honest,
        };
        AttackerSpec::new(self.compromised.iter().map(|i| i - 1), strategy, self.n_max)
    }

    pub fn crossing_mode(&self) -> Result<CrossingMode> {
        match self.crossing.as_str() {
            "bridge" => Ok(CrossingMode::Bridge),
            "grid" => Ok(CrossingMode::Grid),
            other => Err(Error::config(format!(
                "unknown crossing `{other}`, expected bridge or grid"
            ))),
        }
    }

    pub fn min_convention(&self) -> Result<MinConvention> {
        match self.min_convention.as_str() {
            "include_origin" => Ok(MinConvention::IncludeOrigin),
            "exclude_origin" => Ok(MinConvention::ExcludeOrigin),
            other => Err(Error::config(format!(
                "unknown min_convention `{other}`, expected include_origin or exclude_origin"
            ))),
        }
    }

    pub fn sim_options(&self) -> Result<SimOptions> {
        Ok(SimOptions {
            crossing: self.crossing_mode()?,
            convention: self.min_convention()?,
            signal_level_worst_case: self.signal_level_worst_case,
        })
    }
}

/// Name used in output tables.
pub fn scheme_name(kind: FusionKind) -> String {
    match kind {
        FusionKind::Centralized => "centralized".into(),
        FusionKind::KthAlarm(2) => "second_alarm".into(),
        FusionKind::KthAlarm(k) => format!("kth_alarm_{k}"),
        FusionKind::GroupWise {
            num_groups: 3,
            quorum: 2,
        } => "group_wise".into(),
        FusionKind::GroupWise { num_groups, quorum } => format!("group_wise_{quorum}_of_{num_groups}"),
    }
}
