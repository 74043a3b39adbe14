//! Byzantine attacker strategies.
//!
//! A compromised sensor's reported stream is replaced according to its
//! [`Strategy`]. The two idealized worst cases, [`Strategy::ImmediateAlarm`]
//! and [`Strategy::Silent`], act at the fusion layer: the detector that
//! contains the compromised sensor alarms at time zero, or never.

use std::collections::BTreeSet;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::Increment;

/// Drift magnitude used when the worst cases are emulated at signal level.
pub const SIGNAL_LEVEL_SLOPE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Honest,
    /// Reports `slope * t + W_t` regardless of what it observes. With
    /// `slope = N` this is the attack that makes centralized CUSUM's delay
    /// grow linearly in its ARL.
    LinearDrift {
        slope: f64,
    },
    ImmediateAlarm,
    Silent,
}

/// The quantity a simulation run estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Arl,
    Delay,
}

/// A configured attack: either one fixed strategy, or the worst case for
/// whichever metric is being estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackMode {
    Fixed(Strategy),
    WorstCase,
}

impl AttackMode {
    pub fn resolve(self, metric: Metric) -> Strategy {
        match self {
            AttackMode::Fixed(s) => s,
            AttackMode::WorstCase => worst_case_mode(metric),
        }
    }
}

/// The strategy that hurts `metric` most: alarm at once when the center is
/// measuring false alarms, stay silent when it is measuring delay.
pub fn worst_case_mode(metric: Metric) -> Strategy {
    match metric {
        Metric::Arl => Strategy::ImmediateAlarm,
        Metric::Delay => Strategy::Silent,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackerSpec {
    compromised: BTreeSet<usize>,
    strategy: Strategy,
    n_max: usize,
}

impl AttackerSpec {
    /// Indices are zero-based.
    pub fn new(compromised: impl IntoIterator<Item = usize>, strategy: Strategy, n_max: usize) -> Result<Self> {
        let compromised: BTreeSet<usize> = compromised.into_iter().collect();
        if compromised.len() > n_max {
            return Err(Error::config(format!(
                "{} compromised sensors exceed the asserted bound n_max = {n_max}",
                compromised.len()
            )));
        }
        if let Strategy::LinearDrift { slope } = strategy {
            if !slope.is_finite() {
                return Err(Error::config("attack slope must be finite"));
            }
        }
        Ok(Self {
            compromised,
            strategy,
            n_max,
        })
    }

    /// No compromised sensors.
    pub fn none() -> Self {
        Self {
            compromised: BTreeSet::new(),
            strategy: Strategy::Honest,
            n_max: 0,
        }
    }

    /// One compromised sensor, the last one.
    pub fn last_sensor(n_sensors: usize, strategy: Strategy) -> Result<Self> {
        Self::new([n_sensors - 1], strategy, 1)
    }

    pub fn compromised(&self) -> &BTreeSet<usize> {
        &self.compromised
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Self {
        Self {
            strategy,
            ..self.clone()
        }
    }

    pub fn is_compromised(&self, sensor: usize) -> bool {
        self.compromised.contains(&sensor)
    }

    /// Checks indices against the sensor count and, for schemes that rely on
    /// an honest majority, `n_max < N / 2`.
    pub fn validate(&self, n_sensors: usize, needs_honest_majority: bool) -> Result<()> {
        if let Some(&bad) = self.compromised.iter().find(|&&s| s >= n_sensors) {
            return Err(Error::config(format!(
                "compromised sensor {bad} out of range for N = {n_sensors}"
            )));
        }
        if needs_honest_majority && 2 * self.n_max >= n_sensors {
            return Err(Error::config(format!(
                "n_max = {} must be below N/2 = {}",
                self.n_max,
                n_sensors as f64 / 2.0
            )));
        }
        Ok(())
    }
}

/// What a compromised sensor contributes on one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackOutput {
    Signal(Increment),
    /// Fusion-layer marker: the sensor's detector alarms at time zero.
    ForceAlarm,
    /// Fusion-layer marker: the sensor's detector never alarms.
    ForceSilence,
}

/// Time discretization of the stream being attacked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    Continuous { dt: f64 },
    Discrete,
}

/// Replaces the compromised sensor's report for one step. `rng` is the
/// attacker's own noise source.
pub fn apply_attack<R: RngCore + ?Sized>(
    spec: &AttackerSpec,
    honest: Increment,
    sensor: usize,
    step: StepKind,
    rng: &mut R,
) -> Result<AttackOutput> {
    if !spec.is_compromised(sensor) {
        return Err(Error::config(format!("sensor {sensor} is not compromised")));
    }
    Ok(match spec.strategy {
        Strategy::Honest => AttackOutput::Signal(honest),
        Strategy::LinearDrift { slope } => {
            let gauss: f64 = StandardNormal.sample(rng);
            AttackOutput::Signal(drift_report(slope, gauss, step))
        }
        Strategy::ImmediateAlarm => AttackOutput::ForceAlarm,
        Strategy::Silent => AttackOutput::ForceSilence,
    })
}

/// `slope * dt + sqrt(dt) * gauss`, with `dt = 1` in discrete time.
pub fn drift_report(slope: f64, gauss: f64, step: StepKind) -> Increment {
    match step {
        StepKind::Continuous { dt } => Increment(slope * dt + dt.sqrt() * gauss),
        StepKind::Discrete => Increment(slope + gauss),
    }
}

/// Signal-level stand-in for the fusion-layer worst cases: a huge positive
/// drift for an immediate alarm, a huge negative one for silence.
pub fn signal_level_equivalent(strategy: Strategy) -> Strategy {
    match strategy {
        Strategy::ImmediateAlarm => Strategy::LinearDrift {
            slope: SIGNAL_LEVEL_SLOPE,
        },
        Strategy::Silent => Strategy::LinearDrift {
            slope: -SIGNAL_LEVEL_SLOPE,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    #[test]
    fn linear_drift_step() {
        let inc = drift_report(9.0, 0.0, StepKind::Continuous { dt: 0.01 });
        assert!((inc.value() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn honest_is_identity() {
        let spec = AttackerSpec::last_sensor(9, Strategy::Honest).unwrap();
        let mut rng = stream(1, 0, Domain::Attacker, 8);
        for x in [-3.0, 0.0, 0.25, 7.5] {
            let out = apply_attack(&spec, Increment(x), 8, StepKind::Continuous { dt: 0.01 }, &mut rng).unwrap();
            assert_eq!(out, AttackOutput::Signal(Increment(x)));
        }
    }

    #[test]
    fn fusion_level_markers() {
        let mut rng = stream(1, 0, Domain::Attacker, 0);
        let alarm = AttackerSpec::new([0], Strategy::ImmediateAlarm, 1).unwrap();
        let silent = alarm.with_strategy(Strategy::Silent);
        let inc = Increment(1.0);
        assert_eq!(
            apply_attack(&alarm, inc, 0, StepKind::Discrete, &mut rng).unwrap(),
            AttackOutput::ForceAlarm
        );
        assert_eq!(
            apply_attack(&silent, inc, 0, StepKind::Discrete, &mut rng).unwrap(),
            AttackOutput::ForceSilence
        );
    }

    #[test]
    fn honest_sensor_cannot_be_attacked() {
        let spec = AttackerSpec::last_sensor(9, Strategy::Silent).unwrap();
        let mut rng = stream(1, 0, Domain::Attacker, 0);
        let err = apply_attack(&spec, Increment(0.0), 3, StepKind::Discrete, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn worst_cases() {
        assert_eq!(worst_case_mode(Metric::Arl), Strategy::ImmediateAlarm);
        assert_eq!(worst_case_mode(Metric::Delay), Strategy::Silent);
        assert_eq!(
            AttackMode::Fixed(Strategy::Honest).resolve(Metric::Arl),
            Strategy::Honest
        );
        assert_eq!(AttackMode::WorstCase.resolve(Metric::Delay), Strategy::Silent);
    }

    #[test]
    fn bound_on_compromised_count() {
        assert!(AttackerSpec::new([0, 1], Strategy::Silent, 1).is_err());
        let spec = AttackerSpec::new([0, 1], Strategy::Silent, 2).unwrap();
        assert!(spec.validate(5, true).is_ok());
        assert!(spec.validate(4, true).is_err());
        assert!(spec.validate(4, false).is_ok());
        assert!(spec.validate(1, false).is_err());
    }
}
