//! CUSUM statistic maintenance and stopping.
//!
//! The statistic is kept in its three-part form `y = u - m`, where `u` is the
//! cumulative log-likelihood ratio and `m` its running minimum. The same
//! machinery serves the centralized detector (all sensors), the per-sensor
//! detectors of the second-alarm scheme and the per-group detectors of the
//! group-wise scheme; only the scope size differs.
//!
//! Continuous-time detectors run on a `dt` grid. In [`CrossingMode::Bridge`]
//! (the default) the running minimum is updated with an exact draw of the
//! Brownian-bridge minimum over each step and threshold crossings between
//! grid points are detected with the bridge crossing probability, so the
//! grid statistic has the law of the continuous one at grid times.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::signal::{DiscreteModel, Increment};

/// Exponents beyond this make a bridge event probability negligible
/// (`e^-50 < 2e-22`); no uniform is drawn for it.
const BRIDGE_EXPONENT_CUTOFF: f64 = 50.0;

/// Whether the running minimum starts with `u_0 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinConvention {
    /// `m_k = min(0, u_1, ..., u_k)`, i.e. `y_k = max(0, y_{k-1} + Z_k)`.
    #[default]
    IncludeOrigin,
    /// `m_k = min(u_1, ..., u_k)`; forces `y_1 = 0`.
    ExcludeOrigin,
}

/// How a continuous-time detector looks for threshold crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossingMode {
    /// Crossings only at grid points; the minimum only sees grid values.
    Grid,
    /// Exact bridge minimum plus between-grid crossing detection.
    #[default]
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CusumState {
    pub u: f64,
    pub m: f64,
    pub y: f64,
    pub steps: u64,
}

impl Default for CusumState {
    fn default() -> Self {
        Self::new()
    }
}

impl CusumState {
    pub fn new() -> Self {
        Self {
            u: 0.0,
            m: 0.0,
            y: 0.0,
            steps: 0,
        }
    }

    /// Adds `du` to `u` and updates the minimum from the new grid value.
    pub fn advance(&mut self, du: f64, convention: MinConvention) {
        self.u += du;
        self.m = if self.steps == 0 && convention == MinConvention::ExcludeOrigin {
            self.u
        } else {
            self.m.min(self.u)
        };
        self.y = self.u - self.m;
        self.steps += 1;
    }

    /// Like [`advance`](Self::advance), with the path minimum over the step
    /// known to be `path_min`.
    fn advance_with_min(&mut self, du: f64, path_min: f64) {
        self.u += du;
        self.m = self.m.min(self.u).min(path_min);
        self.y = self.u - self.m;
        self.steps += 1;
    }
}

/// One grid step of the continuous statistic:
/// `u += mu * sum(increments) - scope_size * mu^2 * dt / 2`.
pub fn continuous_cusum_step(
    state: &CusumState,
    increments: &[Increment],
    mu: f64,
    dt: f64,
    scope_size: usize,
) -> Result<CusumState> {
    if increments.len() != scope_size {
        return Err(Error::config(format!(
            "expected {scope_size} increments, got {}",
            increments.len()
        )));
    }
    let sum: f64 = increments.iter().map(|i| i.value()).sum();
    let mut next = *state;
    next.advance(
        mu * sum - 0.5 * scope_size as f64 * mu * mu * dt,
        MinConvention::IncludeOrigin,
    );
    Ok(next)
}

/// One step of the discrete statistic: `u += sum_n ln f1(x_n) / f0(x_n)`.
pub fn discrete_cusum_step(
    state: &CusumState,
    observations: &[f64],
    model: &DiscreteModel,
    convention: MinConvention,
) -> Result<CusumState> {
    let mut z = 0.0;
    for &x in observations {
        z += model.llr(x)?;
    }
    let mut next = *state;
    next.advance(z, convention);
    Ok(next)
}

/// Outcome of running a detector (or a fused scheme) to its stopping time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRecord {
    pub stopped: bool,
    /// Time units for continuous models, integer steps for discrete ones;
    /// `+inf` when censored.
    pub stop_time: f64,
    /// Statistic minus threshold at the stopping instant.
    pub overshoot: f64,
    /// True when the run hit its step cap (or can never stop).
    pub censored: bool,
}

impl StoppingRecord {
    pub fn at(stop_time: f64, overshoot: f64) -> Self {
        Self {
            stopped: true,
            stop_time,
            overshoot,
            censored: false,
        }
    }

    pub fn running() -> Self {
        Self {
            stopped: false,
            stop_time: f64::INFINITY,
            overshoot: 0.0,
            censored: false,
        }
    }

    pub fn censored() -> Self {
        Self {
            stopped: false,
            stop_time: f64::INFINITY,
            overshoot: 0.0,
            censored: true,
        }
    }

    /// Stopping time as seen by the fusion center: `+inf` unless stopped.
    pub fn alarm_time(&self) -> f64 {
        if self.stopped {
            self.stop_time
        } else {
            f64::INFINITY
        }
    }
}

/// Compares `y` against the threshold at the state's current time.
pub fn check_stop(state: &CusumState, threshold: f64, step_length: f64) -> StoppingRecord {
    if state.y >= threshold {
        StoppingRecord::at(state.steps as f64 * step_length, state.y - threshold)
    } else {
        StoppingRecord::running()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Continuous {
        mu: f64,
        dt: f64,
        compensator: f64,
        step_variance: f64,
        crossing: CrossingMode,
        bridge: Option<StreamRng>,
    },
    Discrete {
        convention: MinConvention,
    },
}

/// A CUSUM detector over a fixed scope of sensors.
#[derive(Debug, Clone)]
pub struct Detector {
    state: CusumState,
    threshold: f64,
    kind: Kind,
}

impl Detector {
    /// Continuous-time detector summing `scope_size` Brownian streams.
    /// Bridge mode needs a dedicated random stream.
    pub fn continuous(
        mu: f64,
        dt: f64,
        scope_size: usize,
        threshold: f64,
        crossing: CrossingMode,
        bridge: Option<StreamRng>,
    ) -> Result<Self> {
        if scope_size == 0 {
            return Err(Error::config("detector scope must be nonempty"));
        }
        if crossing == CrossingMode::Bridge && bridge.is_none() {
            return Err(Error::config("bridge crossing needs a random stream"));
        }
        let s = scope_size as f64;
        Ok(Self {
            state: CusumState::new(),
            threshold,
            kind: Kind::Continuous {
                mu,
                dt,
                compensator: 0.5 * s * mu * mu * dt,
                step_variance: s * mu * mu * dt,
                crossing,
                bridge,
            },
        })
    }

    pub fn discrete(threshold: f64, convention: MinConvention) -> Self {
        Self {
            state: CusumState::new(),
            threshold,
            kind: Kind::Discrete { convention },
        }
    }

    pub fn state(&self) -> &CusumState {
        &self.state
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Stop at time zero when `y_0 = 0` already meets the threshold.
    pub fn initial_stop(&self) -> Option<StoppingRecord> {
        (self.state.y >= self.threshold).then(|| StoppingRecord::at(0.0, self.state.y - self.threshold))
    }

    /// Advances one step. `input` is the sum of the scope's increments
    /// (continuous) or the sum of their log-likelihood ratios (discrete).
    pub fn step(&mut self, input: f64) -> Option<StoppingRecord> {
        let threshold = self.threshold;
        match &mut self.kind {
            Kind::Discrete { convention } => {
                self.state.advance(input, *convention);
                (self.state.y >= threshold)
                    .then(|| StoppingRecord::at(self.state.steps as f64, self.state.y - threshold))
            }
            Kind::Continuous {
                mu,
                dt,
                compensator,
                step_variance,
                crossing,
                bridge,
            } => {
                let du = *mu * input - *compensator;
                let start = self.state;
                let step_start = start.steps as f64 * *dt;
                match (crossing, bridge) {
                    (CrossingMode::Bridge, Some(rng)) => {
                        let a = start.u;
                        let b = a + du;
                        let var = *step_variance;
                        let path_min = bridge_minimum_below(a, b, start.m, var, rng);
                        self.state.advance_with_min(du, path_min);
                        if self.state.y >= threshold {
                            return Some(StoppingRecord::at(step_start + 0.5 * *dt, self.state.y - threshold));
                        }
                        let barrier = start.m + threshold;
                        if bridge_crosses(a, b, barrier, var, rng) {
                            return Some(StoppingRecord::at(step_start + 0.5 * *dt, 0.0));
                        }
                        None
                    }
                    _ => {
                        self.state.advance(du, MinConvention::IncludeOrigin);
                        (self.state.y >= threshold)
                            .then(|| StoppingRecord::at(self.state.steps as f64 * *dt, self.state.y - threshold))
                    }
                }
            }
        }
    }
}

/// Minimum of a Brownian bridge from `a` to `b` with variance `var` over the
/// step, sampled only when it can fall below `floor`; returns `+inf` when
/// the minimum stays above `floor`.
fn bridge_minimum_below(a: f64, b: f64, floor: f64, var: f64, rng: &mut StreamRng) -> f64 {
    if b > floor {
        let exponent = 2.0 * (a - floor) * (b - floor) / var;
        if exponent > BRIDGE_EXPONENT_CUTOFF {
            return f64::INFINITY;
        }
        let v = 1.0 - rng.random::<f64>();
        if v >= (-exponent).exp() {
            return f64::INFINITY;
        }
        bridge_minimum(a, b, var, v)
    } else {
        let v = 1.0 - rng.random::<f64>();
        bridge_minimum(a, b, var, v)
    }
}

/// Inverse-CDF draw of the bridge minimum for uniform `v` in `(0, 1]`.
fn bridge_minimum(a: f64, b: f64, var: f64, v: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b - (d * d - 2.0 * var * v.ln()).sqrt())
}

/// Whether a bridge from `a` to `b` (both below `barrier`) touches it.
fn bridge_crosses(a: f64, b: f64, barrier: f64, var: f64, rng: &mut StreamRng) -> bool {
    let exponent = 2.0 * (barrier - a) * (barrier - b) / var;
    if exponent > BRIDGE_EXPONENT_CUTOFF {
        return false;
    }
    rng.random::<f64>() < (-exponent).exp()
}

/// Supplies one detector input per step.
pub trait StepSource {
    fn next_input(&mut self, step: u64) -> Result<f64>;
}

impl<F: FnMut(u64) -> Result<f64>> StepSource for F {
    fn next_input(&mut self, step: u64) -> Result<f64> {
        self(step)
    }
}

/// Runs a single detector until it stops or `max_steps` steps have elapsed.
/// Truncated runs come back as [`StoppingRecord::censored`].
pub fn run_to_stop<S: StepSource>(detector: &mut Detector, source: &mut S, max_steps: u64) -> Result<StoppingRecord> {
    if let Some(rec) = detector.initial_stop() {
        return Ok(rec);
    }
    for step in 0..max_steps {
        let input = source.next_input(step)?;
        if let Some(rec) = detector.step(input) {
            return Ok(rec);
        }
    }
    Ok(StoppingRecord::censored())
}
