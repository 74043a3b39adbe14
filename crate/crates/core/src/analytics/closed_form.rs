//! Exact ARL and delay of centralized Brownian CUSUM, and the drift-attack
//! bounds.

use crate::error::{Error, Result};

/// `2(e^ν − ν − 1) / (Nμ²)`.
pub fn arl_centralized_closed_form(nu: f64, n: usize, mu: f64) -> f64 {
    2.0 * (nu.exp_m1() - nu) / (n as f64 * mu * mu)
}

/// `2(e^{−ν} + ν − 1) / (Nμ²)`.
pub fn delay_centralized_closed_form(nu: f64, n: usize, mu: f64) -> f64 {
    2.0 * ((-nu).exp_m1() + nu) / (n as f64 * mu * mu)
}

/// False-alarm and delay bounds for centralized CUSUM when one sensor
/// reports drift `N` instead of its observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Bounds {
    /// Upper bound on the ARL (attained with equality).
    pub arl_upper: f64,
    /// Lower bound on the detection delay.
    pub delay_lower: f64,
}

pub fn prop1_bounds(nu: f64, n: usize, mu: f64) -> Prop1Bounds {
    let f = (-nu).exp_m1() + nu;
    let n = n as f64;
    Prop1Bounds {
        arl_upper: f / (n * mu * mu / 2.0),
        delay_lower: f / ((1.5 * n - 1.0) * mu * mu),
    }
}

/// Threshold at which honest centralized CUSUM over `n` sensors has ARL
/// `target`, by bisection on the closed form.
pub fn calibrate_centralized_threshold(target: f64, n: usize, mu: f64) -> Result<f64> {
    if !(target.is_finite() && target >= 0.0) {
        return Err(Error::config(format!("cannot calibrate to ARL {target}")));
    }
    let mut hi = 1.0;
    while arl_centralized_closed_form(hi, n, mu) < target {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::Convergence(format!("no threshold reaches ARL {target}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if arl_centralized_closed_form(mid, n, mu) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
