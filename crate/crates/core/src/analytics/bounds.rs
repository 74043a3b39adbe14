//! Delay-versus-ARL bounds for the second-alarm and group-wise schemes.
//!
//! Asymptotic `o(1)` terms are dropped, so these are envelopes rather than
//! strict inequalities at small thresholds.

use crate::error::Result;
use crate::signal::DiscreteModel;

use super::renewal::RenewalConstants;

/// Second-alarm scheme, Brownian sensors:
/// `4/μ² (ln ARL + ln((N−1)μ²/2) − 1)`.
pub fn theorem1_delay_bound(arl: f64, n: usize, mu: f64) -> f64 {
    let m2 = mu * mu;
    4.0 / m2 * (arl.ln() + ((n as f64 - 1.0) * m2 / 2.0).ln() - 1.0)
}

/// Group-wise scheme, Brownian sensors:
/// `12/(μ²N) (ln ARL + ln(Nμ²/3) − 1)`.
pub fn theorem2_delay_bound(arl: f64, n: usize, mu: f64) -> f64 {
    let m2 = mu * mu;
    let n = n as f64;
    12.0 / (m2 * n) * (arl.ln() + (n * m2 / 3.0).ln() - 1.0)
}

/// Second-alarm scheme, discrete time, with single-sensor constants:
/// `2/D (ln ARL + ln((1−e^{1−N}) R₁² D / e^{1−N}) + β₁ + κ₁)`. Needs `N ≥ 2`.
pub fn theorem3_delay_bound(arl: f64, model: &DiscreteModel, n: usize, constants: &RenewalConstants) -> Result<f64> {
    let d = model.kl_divergence()?;
    let m = n as f64 - 1.0;
    // ln((1 − e^{−m}) / e^{−m}) without cancellation.
    let odds = m + (-(-m).exp()).ln_1p();
    let r2 = constants.r * constants.r;
    Ok(2.0 / d * (arl.ln() + odds + (r2 * d).ln() + constants.beta + constants.kappa))
}

/// Group-wise scheme, discrete time, with constants for one group:
/// `2/(D N/3) (ln ARL + ln((1−e^{−1}) R_G² D N/3 / e^{−1}) + β_G + κ_G)`.
pub fn theorem4_delay_bound(arl: f64, model: &DiscreteModel, n: usize, constants: &RenewalConstants) -> Result<f64> {
    let dg = model.kl_divergence()? * n as f64 / 3.0;
    let odds = (std::f64::consts::E - 1.0).ln();
    let r2 = constants.r * constants.r;
    Ok(2.0 / dg * (arl.ln() + odds + (r2 * dg).ln() + constants.beta + constants.kappa))
}

/// ARL lower bound of the second-alarm scheme at threshold `h`, leading term
/// `2e^h / ((N−1)μ²)`.
pub fn second_alarm_arl_lower(h: f64, n: usize, mu: f64) -> f64 {
    2.0 * h.exp() / ((n as f64 - 1.0) * mu * mu)
}

/// Delay upper bound of the second-alarm scheme at threshold `h`:
/// `4(e^{−h} + h − 1)/μ²`.
pub fn second_alarm_delay_upper(h: f64, mu: f64) -> f64 {
    4.0 * ((-h).exp_m1() + h) / (mu * mu)
}

/// ARL lower bound of the 2-of-3 group scheme, leading term `3e^h/(μ²N)`.
pub fn group_wise_arl_lower(h: f64, n: usize, mu: f64) -> f64 {
    3.0 * h.exp() / (mu * mu * n as f64)
}

/// Delay upper bound of the 2-of-3 group scheme: `12(e^{−h} + h − 1)/(μ²N)`.
pub fn group_wise_delay_upper(h: f64, n: usize, mu: f64) -> f64 {
    12.0 * ((-h).exp_m1() + h) / (mu * mu * n as f64)
}
