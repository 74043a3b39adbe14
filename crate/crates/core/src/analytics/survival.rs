//! Survival functions of single-sensor Brownian CUSUM stopping times,
//! after the change (`P₀`) and with no change (`P∞`), as eigenfunction
//! series in the roots from [`super::roots`].

use crate::error::{Error, Result};

use super::roots::solve_transcendental_roots;

/// Term-wise integrals decay like `k^{-3}`; large thresholds need a few
/// thousand roots to reach the default tolerance.
pub const DEFAULT_TERMS: usize = 10_000;
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeriesParams {
    pub h: f64,
    pub mu: f64,
    pub roots_phi: Vec<f64>,
    pub roots_theta: Vec<f64>,
    pub root_eta: f64,
    /// Number of roots available in each family.
    pub k: usize,
    /// A series stops once its latest term is below `tail_tol` times the
    /// partial sum.
    pub tail_tol: f64,
}

/// A truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Bound on the truncation error (the series alternate, so the last
    /// included term bounds the tail).
    pub error_bound: f64,
    pub terms: usize,
}

fn u(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    s.powi(3) / (x - s * c)
}

fn v(x: f64) -> f64 {
    let (s, c) = (x.sinh(), x.cosh());
    s.powi(3) / (s * c - x)
}

impl SurvivalSeriesParams {
    pub fn new(h: f64, mu: f64) -> Result<Self> {
        Self::with_terms(h, mu, DEFAULT_TERMS, DEFAULT_TAIL_TOL)
    }

    pub fn with_terms(h: f64, mu: f64, k: usize, tail_tol: f64) -> Result<Self> {
        if !(mu.is_finite() && mu != 0.0) {
            return Err(Error::config(format!("drift must be finite and nonzero, got {mu}")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::config("tail tolerance must be positive"));
        }
        let roots = solve_transcendental_roots(h, k)?;
        Ok(Self {
            h,
            mu,
            roots_phi: roots.phi,
            roots_theta: roots.theta,
            root_eta: roots.eta,
            k,
            tail_tol,
        })
    }

    /// Decay rate `μ²/(8cos²x)` of the term for root `x`.
    fn rate(&self, x: f64) -> f64 {
        self.mu * self.mu / (8.0 * x.cos().powi(2))
    }

    fn eta_rate(&self) -> f64 {
        self.mu * self.mu / (8.0 * self.root_eta.cosh().powi(2))
    }

    /// `P₀(T ≥ t)`, clamped to `[0, 1]`.
    pub fn survival_p0(&self, t: f64) -> Result<SeriesValue> {
        let scale = 2.0 * (self.h / 2.0).exp();
        let terms = self.roots_phi.iter().map(|&x| scale * u(x) * (-self.rate(x) * t).exp());
        Ok(clamp(self.sum(t, 0.0, terms)?))
    }

    /// `P∞(T ≥ t)`, clamped to `[0, 1]`.
    pub fn survival_pinf(&self, t: f64) -> Result<SeriesValue> {
        let scale = 2.0 * (-self.h / 2.0).exp();
        let lead = scale * v(self.root_eta) * (-self.eta_rate() * t).exp();
        let terms = self
            .roots_theta
            .iter()
            .map(|&x| scale * u(x) * (-self.rate(x) * t).exp());
        Ok(clamp(self.sum(t, lead, terms)?))
    }

    /// `∫₀^∞ P₀(T ≥ t) dt`, integrated term by term.
    pub fn integral_p0(&self) -> Result<SeriesValue> {
        let scale = 2.0 * (self.h / 2.0).exp();
        let terms = self.roots_phi.iter().map(|&x| scale * u(x) / self.rate(x));
        self.sum(0.0, 0.0, terms)
    }

    /// `∫₀^∞ P∞(T ≥ t) dt`, integrated term by term.
    pub fn integral_pinf(&self) -> Result<SeriesValue> {
        let scale = 2.0 * (-self.h / 2.0).exp();
        let lead = scale * v(self.root_eta) / self.eta_rate();
        let terms = self.roots_theta.iter().map(|&x| scale * u(x) / self.rate(x));
        self.sum(0.0, lead, terms)
    }

    /// Smallest `t` at which the last available term of either series falls
    /// below half of `tail_tol`. Below it, evaluation needs more roots.
    pub fn min_evaluable_time(&self) -> f64 {
        let last = |roots: &[f64], scale: f64| {
            let x = *roots.last().expect("at least one root");
            ((2.0 * scale * u(x).abs() / self.tail_tol).ln() / self.rate(x)).max(0.0)
        };
        f64::max(
            last(&self.roots_phi, 2.0 * (self.h / 2.0).exp()),
            last(&self.roots_theta, 2.0 * (-self.h / 2.0).exp()),
        )
    }

    fn sum(&self, t: f64, lead: f64, terms: impl Iterator<Item = f64>) -> Result<SeriesValue> {
        let mut partial = lead;
        for (i, term) in terms.enumerate() {
            partial += term;
            if term.abs() <= self.tail_tol * partial.abs() {
                return Ok(SeriesValue {
                    value: partial,
                    error_bound: term.abs(),
                    terms: i + 1,
                });
            }
        }
        Err(Error::IncreaseK { t, terms: self.k })
    }
}

fn clamp(s: SeriesValue) -> SeriesValue {
    SeriesValue {
        value: s.value.clamp(0.0, 1.0),
        ..s
    }
}
