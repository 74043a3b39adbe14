//! Monte Carlo estimates of the renewal constants of the discrete-time
//! log-likelihood-ratio walk under the post-change law.
//!
//! * `κ`: mean overshoot `y_T − ν` of the reflected walk at its stopping time.
//! * `R`: mean of `exp(−(u_η − ν))` for the unreflected walk at its first
//!   passage over `ν`.
//! * `β`: mean all-time minimum of the unreflected walk (started at 0).
//!
//! `κ` and `R` are limits in `ν`; they are estimated along a threshold ladder
//! and the top rung is reported, with a flag if the top two rungs disagree.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{stream, Domain, StreamRng};
use crate::signal::DiscreteModel;
use crate::stats::mean_se;

pub const DEFAULT_LADDER: [f64; 3] = [6.0, 8.0, 10.0];

/// Walks longer than this are treated as a model error (the post-change
/// drift should be positive).
const MAX_WALK_STEPS: u64 = 10_000_000;

/// Largest window tried for the all-time minimum.
const MAX_BETA_WINDOW: u64 = 1 << 20;

const INITIAL_BETA_WINDOW: u64 = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalOptions {
    pub trials: usize,
    pub ladder: Vec<f64>,
    pub seed: u64,
}

impl Default for RenewalOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            ladder: DEFAULT_LADDER.to_vec(),
            seed: 0,
        }
    }
}

/// Estimates at one ladder threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderPoint {
    pub threshold: f64,
    pub kappa: f64,
    pub kappa_se: f64,
    pub r: f64,
    pub r_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenewalConstants {
    pub kappa: f64,
    pub kappa_se: f64,
    pub beta: f64,
    pub beta_se: f64,
    pub r: f64,
    pub r_se: f64,
    /// Steps in the window used for `β`.
    pub beta_window: u64,
    pub ladder: Vec<LadderPoint>,
    /// False when the top two ladder rungs differ by more than three combined
    /// standard errors, or the `β` window never settled.
    pub converged: bool,
}

impl RenewalConstants {
    /// Constants with no attached uncertainty, e.g. from an external source.
    pub fn from_values(kappa: f64, beta: f64, r: f64) -> Self {
        Self {
            kappa,
            kappa_se: 0.0,
            beta,
            beta_se: 0.0,
            r,
            r_se: 0.0,
            beta_window: 0,
            ladder: Vec::new(),
            converged: true,
        }
    }
}

/// One step of the walk: the summed log-likelihood ratio of `scope_size`
/// post-change observations.
fn post_change_step(model: &DiscreteModel, scope_size: usize, rng: &mut StreamRng) -> Result<f64> {
    let mut z = 0.0;
    for _ in 0..scope_size {
        z += model.llr(model.f1().sample(rng))?;
    }
    Ok(z)
}

fn overshoot(model: &DiscreteModel, scope_size: usize, nu: f64, reflect: bool, rng: &mut StreamRng) -> Result<f64> {
    let mut y = 0.0f64;
    for _ in 0..MAX_WALK_STEPS {
        y += post_change_step(model, scope_size, rng)?;
        if reflect {
            y = y.max(0.0);
        }
        if y >= nu {
            return Ok(y - nu);
        }
    }
    Err(Error::Convergence(format!(
        "walk did not reach {nu} in {MAX_WALK_STEPS} steps"
    )))
}

pub fn estimate_renewal_constants(
    model: &DiscreteModel,
    scope_size: usize,
    opts: &RenewalOptions,
) -> Result<RenewalConstants> {
    if opts.trials < 10_000 {
        return Err(Error::config(format!(
            "renewal constants need at least 10000 trials, got {}",
            opts.trials
        )));
    }
    if scope_size == 0 {
        return Err(Error::config("scope must contain at least one sensor"));
    }
    if opts.ladder.is_empty() || opts.ladder.windows(2).any(|w| w[1] <= w[0]) || opts.ladder[0] <= 0.0 {
        return Err(Error::config("threshold ladder must be positive and increasing"));
    }
    let trials = opts.trials as u64;
    let sample = |index: u32, f: &(dyn Fn(&mut StreamRng) -> Result<f64> + Sync)| -> Result<Vec<f64>> {
        (0..trials)
            .into_par_iter()
            .map(|t| f(&mut stream(opts.seed, t, Domain::Renewal, index)))
            .collect()
    };

    let mut ladder = Vec::with_capacity(opts.ladder.len());
    for (i, &nu) in opts.ladder.iter().enumerate() {
        let base = 3 * i as u32;
        let kappa = sample(base, &|rng| overshoot(model, scope_size, nu, true, rng))?;
        let r = sample(base + 1, &|rng| {
            Ok((-overshoot(model, scope_size, nu, false, rng)?).exp())
        })?;
        let (kappa, kappa_se) = mean_se(&kappa);
        let (r, r_se) = mean_se(&r);
        ladder.push(LadderPoint {
            threshold: nu,
            kappa,
            kappa_se,
            r,
            r_se,
        });
    }

    let mut converged = true;
    if let [.., a, b] = ladder.as_slice() {
        let apart = |x: f64, sx: f64, y: f64, sy: f64| (x - y).abs() > 3.0 * sx.hypot(sy);
        if apart(a.kappa, a.kappa_se, b.kappa, b.kappa_se) || apart(a.r, a.r_se, b.r, b.r_se) {
            converged = false;
        }
    }

    let (beta, beta_se, beta_window, beta_settled) = estimate_beta(model, scope_size, opts)?;
    let top = *ladder.last().expect("nonempty ladder");
    Ok(RenewalConstants {
        kappa: top.kappa,
        kappa_se: top.kappa_se,
        beta,
        beta_se,
        r: top.r,
        r_se: top.r_se,
        beta_window,
        ladder,
        converged: converged && beta_settled,
    })
}

/// Mean of `min(0, u_1, …, u_W)`, doubling `W` until the estimate moves by
/// less than its standard error.
fn estimate_beta(model: &DiscreteModel, scope_size: usize, opts: &RenewalOptions) -> Result<(f64, f64, u64, bool)> {
    let index = 3 * opts.ladder.len() as u32;
    let mut walks: Vec<(f64, f64, StreamRng)> = (0..opts.trials as u64)
        .map(|t| (0.0, 0.0, stream(opts.seed, t, Domain::Renewal, index)))
        .collect();
    let advance = |walks: &mut Vec<(f64, f64, StreamRng)>, steps: u64| -> Result<Vec<f64>> {
        walks
            .par_iter_mut()
            .map(|(u, m, rng)| {
                for _ in 0..steps {
                    *u += post_change_step(model, scope_size, rng)?;
                    *m = m.min(*u);
                }
                Ok(*m)
            })
            .collect()
    };
    let mut window = INITIAL_BETA_WINDOW;
    let (mut prev, _) = mean_se(&advance(&mut walks, window)?);
    while window < MAX_BETA_WINDOW {
        let (est, se) = mean_se(&advance(&mut walks, window)?);
        window *= 2;
        if (est - prev).abs() < se {
            return Ok((est, se, window, true));
        }
        prev = est;
    }
    let mins: Vec<f64> = walks.iter().map(|w| w.1).collect();
    let (est, se) = mean_se(&mins);
    Ok((est, se, window, false))
}
