//! Single-trial simulation of a detection scheme.
//!
//! A [`Scenario`] fixes the signal model, the fusion rule with its threshold,
//! the attacker and the random seed. [`Scenario::run_trial`] then plays one
//! independent trial: every sensor draws from its own stream, each detector
//! consumes the reports of its scope, and the run ends as soon as the fusion
//! rule's quorum of alarms is reached.

use std::ops::Range;

use rand_distr::{Distribution, StandardNormal};

use crate::adversary::{drift_report, signal_level_equivalent, AttackerSpec, StepKind, Strategy};
use crate::cusum::{CrossingMode, Detector, MinConvention, StoppingRecord};
use crate::error::{Error, Result};
use crate::fusion::{fuse, FusionRule};
use crate::rng::{stream, Domain, StreamRng};
use crate::signal::{Increment, SignalModel};

/// Largest supported sensor count (detector stream keys pack the scope).
pub const MAX_SENSORS: usize = 1023;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub crossing: CrossingMode,
    pub convention: MinConvention,
    /// Emulate `ImmediateAlarm` / `Silent` with huge drifts in the reported
    /// signal instead of forcing the detector's alarm time.
    pub signal_level_worst_case: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Honest,
    Drift(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Forced {
    Alarm,
    Silent,
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub fused: StoppingRecord,
    /// One record per detector, in scope order. Detectors still running when
    /// the quorum was reached are reported as not stopped.
    pub detectors: Vec<StoppingRecord>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    model: SignalModel,
    rule: FusionRule,
    max_steps: u64,
    seed: u64,
    options: SimOptions,
    scopes: Vec<Range<usize>>,
    roles: Vec<Role>,
    forced: Vec<Option<Forced>>,
    stream_ids: Vec<u32>,
}

impl Scenario {
    pub fn new(
        model: SignalModel,
        rule: FusionRule,
        attacker: &AttackerSpec,
        max_steps: u64,
        seed: u64,
        options: SimOptions,
    ) -> Result<Self> {
        let n = rule.sensors();
        if n > MAX_SENSORS {
            return Err(Error::config(format!(
                "at most {MAX_SENSORS} sensors are supported, got {n}"
            )));
        }
        attacker.validate(n, false)?;
        let strategy = if options.signal_level_worst_case {
            signal_level_equivalent(attacker.strategy())
        } else {
            attacker.strategy()
        };
        let roles = (0..n)
            .map(|s| match strategy {
                Strategy::LinearDrift { slope } if attacker.is_compromised(s) => Role::Drift(slope),
                _ => Role::Honest,
            })
            .collect();
        let scopes = rule.scopes();
        let forced = scopes
            .iter()
            .map(|scope| {
                if !scope.clone().any(|s| attacker.is_compromised(s)) {
                    return None;
                }
                match strategy {
                    Strategy::ImmediateAlarm => Some(Forced::Alarm),
                    Strategy::Silent => Some(Forced::Silent),
                    _ => None,
                }
            })
            .collect();
        Ok(Self {
            model,
            rule,
            max_steps,
            seed,
            options,
            scopes,
            roles,
            forced,
            stream_ids: (0..n as u32).collect(),
        })
    }

    /// Reassigns which random stream each sensor position reads.
    pub fn with_stream_ids(mut self, ids: Vec<u32>) -> Result<Self> {
        if ids.len() != self.roles.len() || ids.iter().any(|&i| i as usize > MAX_SENSORS) {
            return Err(Error::config("stream id map must have one valid id per sensor"));
        }
        self.stream_ids = ids;
        Ok(self)
    }

    pub fn rule(&self) -> &FusionRule {
        &self.rule
    }

    pub fn model(&self) -> &SignalModel {
        &self.model
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    /// Plays trial `trial`, stopping once the fused alarm is determined.
    pub fn run_trial(&self, trial: u64) -> Result<TrialOutcome> {
        self.play(trial, true)
    }

    /// Plays trial `trial` until every detector has stopped or hit the cap.
    /// Detector records agree with [`run_trial`](Self::run_trial) for every
    /// detector that stopped there.
    pub fn run_trial_to_completion(&self, trial: u64) -> Result<TrialOutcome> {
        self.play(trial, false)
    }

    fn new_detector(&self, trial: u64, scope: &Range<usize>) -> Result<Detector> {
        let threshold = self.rule.threshold();
        match &self.model {
            SignalModel::Continuous(m) => {
                let bridge = (self.options.crossing == CrossingMode::Bridge).then(|| {
                    // Keyed on the first sensor's stream so permutations carry it along.
                    let key = (self.stream_ids[scope.start] << 10) | scope.len() as u32;
                    stream(self.seed, trial, Domain::Detector, key)
                });
                Detector::continuous(m.mu(), m.dt(), scope.len(), threshold, self.options.crossing, bridge)
            }
            SignalModel::Discrete(_) => Ok(Detector::discrete(threshold, self.options.convention)),
        }
    }

    fn play(&self, trial: u64, stop_at_quorum: bool) -> Result<TrialOutcome> {
        let n = self.roles.len();
        let quorum = self.rule.quorum();
        let mut records = vec![StoppingRecord::running(); self.scopes.len()];
        let mut detectors: Vec<Option<Detector>> = Vec::with_capacity(self.scopes.len());
        let mut alarms = 0usize;
        let mut live = 0usize;
        for (d, scope) in self.scopes.iter().enumerate() {
            match self.forced[d] {
                Some(Forced::Alarm) => {
                    records[d] = StoppingRecord::at(0.0, 0.0);
                    alarms += 1;
                    detectors.push(None);
                }
                Some(Forced::Silent) => detectors.push(None),
                None => {
                    let det = self.new_detector(trial, scope)?;
                    if let Some(rec) = det.initial_stop() {
                        records[d] = rec;
                        alarms += 1;
                        detectors.push(None);
                    } else {
                        live += 1;
                        detectors.push(Some(det));
                    }
                }
            }
        }

        let mut needed = vec![false; n];
        for (d, scope) in self.scopes.iter().enumerate() {
            if detectors[d].is_some() {
                needed[scope.clone()].fill(true);
            }
        }
        let mut sensor_rngs: Vec<Option<StreamRng>> = (0..n)
            .map(|s| needed[s].then(|| stream(self.seed, trial, Domain::Sensor, self.stream_ids[s])))
            .collect();
        let mut attacker_rngs: Vec<Option<StreamRng>> = (0..n)
            .map(|s| {
                (needed[s] && matches!(self.roles[s], Role::Drift(_)))
                    .then(|| stream(self.seed, trial, Domain::Attacker, self.stream_ids[s]))
            })
            .collect();

        let done = |alarms: usize, live: usize| if stop_at_quorum { alarms >= quorum } else { live == 0 };
        let mut values = vec![0.0f64; n];
        let mut step = 0u64;
        while !done(alarms, live) && live > 0 && step < self.max_steps {
            self.draw_step(step, &needed, &mut sensor_rngs, &mut attacker_rngs, &mut values)?;
            for (d, scope) in self.scopes.iter().enumerate() {
                let Some(det) = detectors[d].as_mut() else { continue };
                let input: f64 = values[scope.clone()].iter().sum();
                if let Some(rec) = det.step(input) {
                    records[d] = rec;
                    alarms += 1;
                    live -= 1;
                    detectors[d] = None;
                    needed[scope.clone()].fill(false);
                }
            }
            step += 1;
        }

        for (d, det) in detectors.iter().enumerate() {
            if det.is_some() && (step >= self.max_steps || !stop_at_quorum) {
                records[d] = StoppingRecord::censored();
            }
        }
        let fused = if alarms >= quorum {
            fuse(&self.rule, &records)?
        } else {
            StoppingRecord::censored()
        };
        Ok(TrialOutcome {
            fused,
            detectors: records,
        })
    }

    /// Fills `values` with each needed sensor's detector input for `step`:
    /// the reported increment (continuous) or its log-likelihood ratio
    /// (discrete).
    fn draw_step(
        &self,
        step: u64,
        needed: &[bool],
        sensor_rngs: &mut [Option<StreamRng>],
        attacker_rngs: &mut [Option<StreamRng>],
        values: &mut [f64],
    ) -> Result<()> {
        match &self.model {
            SignalModel::Continuous(m) => {
                let kind = StepKind::Continuous { dt: m.dt() };
                for s in 0..values.len() {
                    if !needed[s] {
                        continue;
                    }
                    let rng = sensor_rngs[s].as_mut().expect("stream for needed sensor");
                    let honest = m.next_continuous_increment(step, rng);
                    values[s] = self.report(s, honest, kind, attacker_rngs).value();
                }
            }
            SignalModel::Discrete(m) => {
                for s in 0..values.len() {
                    if !needed[s] {
                        continue;
                    }
                    let rng = sensor_rngs[s].as_mut().expect("stream for needed sensor");
                    let honest = m.next_discrete_observation(step + 1, rng);
                    let x = self.report(s, honest, StepKind::Discrete, attacker_rngs).value();
                    values[s] = m.llr(x)?;
                }
            }
        }
        Ok(())
    }

    fn report(
        &self,
        s: usize,
        honest: Increment,
        kind: StepKind,
        attacker_rngs: &mut [Option<StreamRng>],
    ) -> Increment {
        match self.roles[s] {
            Role::Honest => honest,
            Role::Drift(slope) => {
                let rng = attacker_rngs[s].as_mut().expect("attacker stream");
                let gauss: f64 = StandardNormal.sample(rng);
                drift_report(slope, gauss, kind)
            }
        }
    }
}
