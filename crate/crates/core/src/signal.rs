//! Honest observation streams for the Brownian and discrete-time models.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// One reported signal value: the change of the observed path over one `dt`
/// (continuous model) or one raw observation (discrete model).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment(pub f64);

impl Increment {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Time at which every sensor's distribution changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChangeTime {
    Never,
    At(f64),
}

impl ChangeTime {
    fn validate(self) -> Result<()> {
        match self {
            ChangeTime::At(t) if !(t >= 0.0 && t.is_finite()) => {
                Err(Error::config(format!("change time must be finite and >= 0, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether the post-change law applies at time `t`.
    pub fn is_after(self, t: f64) -> bool {
        match self {
            ChangeTime::Never => false,
            ChangeTime::At(tau) => t >= tau,
        }
    }
}

/// Brownian observations `xi_t = mu (t - tau)^+ + W_t`, discretized at `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    mu: f64,
    dt: f64,
    change_time: ChangeTime,
}

impl ContinuousModel {
    pub fn new(mu: f64, dt: f64, change_time: ChangeTime) -> Result<Self> {
        if !(mu.is_finite() && mu != 0.0) {
            return Err(Error::config(format!("drift mu must be finite and nonzero, got {mu}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {dt}")));
        }
        change_time.validate()?;
        Ok(Self { mu, dt, change_time })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn change_time(&self) -> ChangeTime {
        self.change_time
    }

    pub fn with_change_time(&self, change_time: ChangeTime) -> Result<Self> {
        Self::new(self.mu, self.dt, change_time)
    }

    /// Drift of the observed path during the step starting at `step * dt`.
    pub fn drift_at_step(&self, step: u64) -> f64 {
        if self.change_time.is_after(step as f64 * self.dt) {
            self.mu
        } else {
            0.0
        }
    }

    /// Increment for step `step` given a standard normal draw.
    pub fn increment_from_normal(&self, step: u64, gauss: f64) -> Increment {
        Increment(self.drift_at_step(step) * self.dt + self.dt.sqrt() * gauss)
    }

    /// Draws the increment over `[t, t + dt)` where `t = step * dt`.
    pub fn next_continuous_increment<R: RngCore + ?Sized>(&self, step: u64, rng: &mut R) -> Increment {
        let gauss: f64 = StandardNormal.sample(rng);
        self.increment_from_normal(step, gauss)
    }
}

/// A probability density usable as `f0` or `f1` in the discrete model.
pub trait Density: Debug + Send + Sync {
    fn ln_pdf(&self, x: f64) -> f64;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    fn in_support(&self, x: f64) -> bool {
        x.is_finite()
    }

    fn mean(&self) -> f64;

    fn as_gaussian(&self) -> Option<Gaussian> {
        None
    }
}

/// Normal density with the given mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub sd: f64,
}

impl Gaussian {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !(mean.is_finite() && sd > 0.0 && sd.is_finite()) {
            return Err(Error::config(format!("invalid Gaussian N({mean}, {sd}^2)")));
        }
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self { mean: 0.0, sd: 1.0 }
    }
}

impl Density for Gaussian {
    fn ln_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z - self.sd.ln() - 0.5 * (2.0 * PI).ln()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let g: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * g
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn as_gaussian(&self) -> Option<Gaussian> {
        Some(*self)
    }
}

/// Discrete-time iid observations: `f0` up to and including `tau`, `f1` after.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    f0: Arc<dyn Density>,
    f1: Arc<dyn Density>,
    change_time: ChangeTime,
    /// Fast path for the LLR of a Gaussian pair with common variance.
    gaussian_shift: Option<(f64, f64)>,
}

impl DiscreteModel {
    pub fn new(f0: Arc<dyn Density>, f1: Arc<dyn Density>, change_time: ChangeTime) -> Result<Self> {
        change_time.validate()?;
        if let ChangeTime::At(t) = change_time {
            if t.fract() != 0.0 {
                return Err(Error::config(format!(
                    "discrete change time must be an integer, got {t}"
                )));
            }
        }
        let gaussian_shift = match (f0.as_gaussian(), f1.as_gaussian()) {
            (Some(a), Some(b)) if a == b => {
                return Err(Error::config("f0 and f1 must differ"));
            }
            (Some(a), Some(b)) if a.sd == b.sd => {
                let var = a.sd * a.sd;
                Some((
                    (b.mean - a.mean) / var,
                    (b.mean * b.mean - a.mean * a.mean) / (2.0 * var),
                ))
            }
            _ => None,
        };
        let model = Self {
            f0,
            f1,
            change_time,
            gaussian_shift,
        };
        match model.kl_divergence() {
            Ok(d) if !(d > 0.0 && d.is_finite()) => Err(Error::config(format!(
                "KL divergence D(f1||f0) must be finite and positive, got {d}"
            ))),
            _ => Ok(model),
        }
    }

    /// The `N(0,1) -> N(mean_shift, 1)` pair.
    pub fn gaussian_shift(mean_shift: f64, change_time: ChangeTime) -> Result<Self> {
        Self::gaussian(0.0, mean_shift, 1.0, change_time)
    }

    pub fn gaussian(pre_mean: f64, post_mean: f64, sd: f64, change_time: ChangeTime) -> Result<Self> {
        Self::new(
            Arc::new(Gaussian::new(pre_mean, sd)?),
            Arc::new(Gaussian::new(post_mean, sd)?),
            change_time,
        )
    }

    pub fn f0(&self) -> &dyn Density {
        self.f0.as_ref()
    }

    pub fn f1(&self) -> &dyn Density {
        self.f1.as_ref()
    }

    pub fn change_time(&self) -> ChangeTime {
        self.change_time
    }

    pub fn with_change_time(&self, change_time: ChangeTime) -> Result<Self> {
        Self::new(self.f0.clone(), self.f1.clone(), change_time)
    }

    /// Log-likelihood ratio `ln f1(x) / f0(x)`.
    pub fn llr(&self, x: f64) -> Result<f64> {
        if !(self.f0.in_support(x) && self.f1.in_support(x)) {
            return Err(Error::Density { x });
        }
        Ok(match self.gaussian_shift {
            Some((slope, offset)) => slope * x - offset,
            None => self.f1.ln_pdf(x) - self.f0.ln_pdf(x),
        })
    }

    /// Draws the observation at integer time `k >= 1`.
    pub fn next_discrete_observation(&self, k: u64, rng: &mut dyn RngCore) -> Increment {
        if matches!(self.change_time, ChangeTime::At(tau) if k as f64 > tau) {
            Increment(self.f1.sample(rng))
        } else {
            Increment(self.f0.sample(rng))
        }
    }

    /// `D(f1 || f0)` in closed form; only Gaussian pairs are supported.
    pub fn kl_divergence(&self) -> Result<f64> {
        match (self.f0.as_gaussian(), self.f1.as_gaussian()) {
            (Some(p0), Some(p1)) => {
                let ratio = p1.sd / p0.sd;
                let shift = (p1.mean - p0.mean) / p0.sd;
                Ok(-ratio.ln() + 0.5 * (ratio * ratio + shift * shift) - 0.5)
            }
            _ => Err(Error::NoAnalyticKl),
        }
    }

    /// `D(f1 || f0)` by the trapezoid rule on `[lo, hi]` with `n` panels.
    pub fn kl_divergence_numeric(&self, lo: f64, hi: f64, n: usize) -> Result<f64> {
        if !(hi > lo) || n == 0 {
            return Err(Error::config("numeric KL needs hi > lo and n > 0"));
        }
        let h = (hi - lo) / n as f64;
        let mut total = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let ln1 = self.f1.ln_pdf(x);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            total += w * ln1.exp() * (ln1 - self.f0.ln_pdf(x));
        }
        Ok(total * h)
    }
}

/// Either signal model, with its change time.
#[derive(Debug, Clone)]
pub enum SignalModel {
    Continuous(ContinuousModel),
    Discrete(DiscreteModel),
}

impl SignalModel {
    pub fn change_time(&self) -> ChangeTime {
        match self {
            SignalModel::Continuous(m) => m.change_time(),
            SignalModel::Discrete(m) => m.change_time(),
        }
    }

    pub fn with_change_time(&self, change_time: ChangeTime) -> Result<Self> {
        Ok(match self {
            SignalModel::Continuous(m) => SignalModel::Continuous(m.with_change_time(change_time)?),
            SignalModel::Discrete(m) => SignalModel::Discrete(m.with_change_time(change_time)?),
        })
    }

    /// Length of one simulation step in time units.
    pub fn step_length(&self) -> f64 {
        match self {
            SignalModel::Continuous(m) => m.dt(),
            SignalModel::Discrete(_) => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignalModel::Continuous(_) => "continuous",
            SignalModel::Discrete(_) => "discrete",
        }
    }
}
