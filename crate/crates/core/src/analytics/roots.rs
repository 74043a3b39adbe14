//! Roots of the transcendental equations behind the single-sensor
//! survival series: `tan φ = −2φ/h`, `tan θ = 2θ/h`, `tanh η = 2η/h`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Bound on the reported residuals.
pub const ROOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Roots {
    /// `φ_k ∈ ((2k−1)π/2, kπ)`.
    pub phi: Vec<f64>,
    /// `θ_k ∈ (kπ, kπ + π/2)`.
    pub theta: Vec<f64>,
    pub eta: f64,
}

/// First `k` roots of each family, by bisection on their bracketing
/// intervals. Needs `h > 2`, otherwise `tanh η = 2η/h` has no positive root.
///
/// The oscillatory equations are solved in the cosine-multiplied form
/// `sin x ∓ a cos x = 0` with `a = 2x/h`. Residuals are that quantity over
/// `√(1 + a²)`, the sine of the angular error, which stays well conditioned
/// near the poles of `tan` where the roots crowd for large `k`.
pub fn solve_transcendental_roots(h: f64, k: usize) -> Result<Roots> {
    if !(h > 2.0) || !h.is_finite() {
        return Err(Error::NoPositiveRoot { h });
    }
    if k == 0 {
        return Err(Error::config("need at least one series term"));
    }
    let c = 2.0 / h;
    let phi = (1..=k)
        .map(|j| {
            let j = j as f64;
            bisect(|x| phi_residual(x, h), (2.0 * j - 1.0) * FRAC_PI_2, j * PI)
        })
        .collect::<Result<Vec<_>>>()?;
    let theta = (1..=k)
        .map(|j| {
            let j = j as f64;
            bisect(|x| theta_residual(x, h), j * PI, j * PI + FRAC_PI_2)
        })
        .collect::<Result<Vec<_>>>()?;
    // tanh(η)/η − c is 1 − c > 0 at 0 and negative at η = h/2.
    let eta = bisect(|x| tanh_over_x(x) - c, 0.0, h / 2.0)?;
    let worst = phi
        .iter()
        .map(|&x| phi_residual(x, h))
        .chain(theta.iter().map(|&x| theta_residual(x, h)))
        .chain([eta_residual(eta, h)])
        .fold(0.0f64, |m, r| m.max(r.abs()));
    if worst >= ROOT_TOLERANCE {
        return Err(Error::Convergence(format!("root residual {worst:e} for h = {h}")));
    }
    Ok(Roots { phi, theta, eta })
}

pub(crate) fn phi_residual(x: f64, h: f64) -> f64 {
    let a = 2.0 * x / h;
    (x.sin() + a * x.cos()) / a.hypot(1.0)
}

pub(crate) fn theta_residual(x: f64, h: f64) -> f64 {
    let a = 2.0 * x / h;
    (x.sin() - a * x.cos()) / a.hypot(1.0)
}

pub(crate) fn eta_residual(x: f64, h: f64) -> f64 {
    x.tanh() - 2.0 * x / h
}

fn tanh_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        x.tanh() / x
    }
}

/// Bisection to machine resolution. `f` must change sign on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracket { lo, hi });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_roots() {
        let r = solve_transcendental_roots(4.0, 2).unwrap();
        assert_relative_eq!(r.eta, 1.915008048154537, max_relative = 1e-13);
        assert_relative_eq!(r.phi[0], 2.288929728103404, max_relative = 1e-13);
        assert_relative_eq!(r.phi[1], 5.08698509410227, max_relative = 1e-13);
        assert_relative_eq!(r.theta[0], 4.274782271458128, max_relative = 1e-13);
        assert_relative_eq!(r.theta[1], 7.596546019750588, max_relative = 1e-13);
        let r = solve_transcendental_roots(6.0, 1).unwrap();
        assert_relative_eq!(r.eta, 2.984704585357887, max_relative = 1e-13);
        assert_relative_eq!(r.phi[0], 2.455643862879444, max_relative = 1e-13);
    }

    #[test]
    fn low_threshold_has_no_eta() {
        assert!(matches!(
            solve_transcendental_roots(2.0, 5),
            Err(Error::NoPositiveRoot { .. })
        ));
        assert!(matches!(
            solve_transcendental_roots(1.0, 5),
            Err(Error::NoPositiveRoot { .. })
        ));
    }

    #[test]
    fn literal_tangent_residuals_for_leading_roots() {
        let h = 5.0;
        let r = solve_transcendental_roots(h, 5).unwrap();
        for &p in &r.phi {
            assert!((p.tan() + 2.0 * p / h).abs() < ROOT_TOLERANCE);
        }
        for &t in &r.theta {
            assert!((t.tan() - 2.0 * t / h).abs() < ROOT_TOLERANCE);
        }
    }

    proptest! {
        #[test]
        fn roots_are_bracketed_ordered_and_accurate(h in 2.05f64..30.0) {
            let r = solve_transcendental_roots(h, 50).unwrap();
            prop_assert!(eta_residual(r.eta, h).abs() < ROOT_TOLERANCE);
            prop_assert!(r.eta > 0.0);
            for (j, (&p, &t)) in r.phi.iter().zip(&r.theta).enumerate() {
                let j = (j + 1) as f64;
                prop_assert!(p > (2.0 * j - 1.0) * FRAC_PI_2 && p < j * PI);
                prop_assert!(t > j * PI && t < j * PI + FRAC_PI_2);
                prop_assert!(phi_residual(p, h).abs() < ROOT_TOLERANCE);
                prop_assert!(theta_residual(t, h).abs() < ROOT_TOLERANCE);
            }
            prop_assert!(r.phi.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.theta.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
