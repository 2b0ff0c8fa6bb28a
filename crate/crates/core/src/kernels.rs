//! One-step Markov kernels: tempered random-walk Metropolis, single-pixel flip
//! Metropolis for binary images, and the adjacent-level swap move.
//!
//! Acceptance probabilities are computed as `exp(min(0, ·))` of log-space
//! quantities, never as ratios of densities.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ladder::BetaLadder;
use crate::sampler::ChainState;
use crate::target::{ContinuousTarget, IsingPosterior, IsingState};

/// `1 ∧ π^β(y)/π^β(x)` from log densities.
///
/// Returns 0 when `y` is outside the support and 1 when only `x` is.
#[inline]
pub fn rwm_acceptance(log_pi_x: f64, log_pi_y: f64, beta: f64) -> f64 {
    rwm_log_acceptance(log_pi_x, log_pi_y, beta).exp()
}

/// Logarithm of [`rwm_acceptance`]; does not underflow for distant states.
#[inline]
pub fn rwm_log_acceptance(log_pi_x: f64, log_pi_y: f64, beta: f64) -> f64 {
    if log_pi_y == f64::NEG_INFINITY || log_pi_y.is_nan() {
        return f64::NEG_INFINITY;
    }
    if log_pi_x == f64::NEG_INFINITY {
        return 0.0;
    }
    (beta * (log_pi_y - log_pi_x)).min(0.0)
}

/// Result of one tempered random-walk Metropolis step.
#[derive(Debug, Clone, PartialEq)]
pub struct RwmOutcome {
    /// The proposal `Y = x + Z`.
    pub proposal: Vec<f64>,
    /// The increment `Z = L w` where `L Lᵀ = Σ`.
    pub increment: Vec<f64>,
    /// The standard normal draw `w`.
    pub noise: Vec<f64>,
    pub proposal_log_pi: f64,
    /// Realized acceptance probability, recorded whether or not the move was taken.
    pub acceptance_prob: f64,
    pub accepted: bool,
}

/// One Metropolis step targeting `π^β` with proposal `N(x, L Lᵀ)`, where
/// `factor` is the lower Cholesky factor `L` of the proposal covariance.
///
/// On acceptance `x` and `log_pi` are overwritten with the proposal.
pub fn rwm_step<T, R>(
    x: &mut [f64],
    log_pi: &mut f64,
    target: &T,
    factor: &DMatrix<f64>,
    beta: f64,
    rng: &mut R,
) -> RwmOutcome
where
    T: ContinuousTarget + ?Sized,
    R: Rng + ?Sized,
{
    let d = x.len();
    debug_assert_eq!(factor.nrows(), d);
    let noise: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut increment = vec![0.0; d];
    for i in 0..d {
        let mut acc = 0.0;
        for (j, w) in noise.iter().enumerate().take(i + 1) {
            acc += factor[(i, j)] * w;
        }
        increment[i] = acc;
    }
    let proposal: Vec<f64> = x.iter().zip(&increment).map(|(a, b)| a + b).collect();
    let proposal_log_pi = target.log_density(&proposal);
    let acceptance_prob = rwm_acceptance(*log_pi, proposal_log_pi, beta);
    let u: f64 = rng.random();
    let accepted = u < acceptance_prob;
    if accepted {
        x.copy_from_slice(&proposal);
        *log_pi = proposal_log_pi;
    }
    RwmOutcome {
        proposal,
        increment,
        noise,
        proposal_log_pi,
        acceptance_prob,
        accepted,
    }
}

/// Result of one single-pixel flip step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipOutcome {
    pub site: (usize, usize),
    /// `log π(flip(x)) − log π(x)`.
    pub delta: f64,
    pub acceptance_prob: f64,
    pub accepted: bool,
}

/// Proposes to flip one uniformly chosen pixel and accepts with probability
/// `exp(min(0, β·Δ))`.
pub fn flip_step<R: Rng + ?Sized>(
    state: &mut IsingState,
    log_pi: &mut f64,
    posterior: &IsingPosterior,
    beta: f64,
    rng: &mut R,
) -> FlipOutcome {
    let (rows, cols) = posterior.shape();
    let site = rng.random_range(0..rows * cols);
    let (row, col) = (site / cols, site % cols);
    let delta = posterior.log_density_delta_unchecked(state, row, col);
    let acceptance_prob = (beta * delta).min(0.0).exp();
    let u: f64 = rng.random();
    let accepted = u < acceptance_prob;
    if accepted {
        posterior.apply_flip(state, row, col);
        *log_pi = posterior.value(state.counts());
    }
    FlipOutcome {
        site: (row, col),
        delta,
        acceptance_prob,
        accepted,
    }
}

/// Probability of exchanging the states of levels `j` and `j + 1`:
/// `1 ∧ (π(x_{j+1}) / π(x_j))^{β_j − β_{j+1}}`.
#[inline]
pub fn swap_acceptance(log_pi_j: f64, log_pi_j1: f64, beta_j: f64, beta_j1: f64) -> f64 {
    swap_acceptance_with_delta(beta_j - beta_j1, log_pi_j, log_pi_j1)
}

/// [`swap_acceptance`] given `Δβ = β_j − β_{j+1}` directly.
#[inline]
pub fn swap_acceptance_with_delta(delta_beta: f64, log_pi_j: f64, log_pi_j1: f64) -> f64 {
    if log_pi_j1 == log_pi_j {
        return 1.0;
    }
    let exponent = delta_beta * (log_pi_j1 - log_pi_j);
    if exponent.is_nan() {
        return 0.0;
    }
    exponent.min(0.0).exp()
}

/// Result of one swap move. `pair` is 0-based: levels `pair` and `pair + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub pair: usize,
    pub acceptance_prob: f64,
    pub accepted: bool,
}

/// Proposes to exchange one uniformly chosen adjacent pair of levels.
///
/// The chosen states and their cached log densities are exchanged on
/// acceptance; no other level is touched. Returns `None` for a single level.
pub fn swap_step<P, R: Rng + ?Sized>(
    chain: &mut ChainState<P>,
    ladder: &BetaLadder,
    rng: &mut R,
) -> Option<SwapOutcome> {
    let levels = chain.levels();
    debug_assert_eq!(levels, ladder.levels());
    if levels < 2 {
        return None;
    }
    let pair = rng.random_range(0..levels - 1);
    let log_pi = chain.log_pi();
    let acceptance_prob = swap_acceptance_with_delta(ladder.delta(pair), log_pi[pair], log_pi[pair + 1]);
    let u: f64 = rng.random();
    let accepted = u < acceptance_prob;
    if accepted {
        chain.swap_levels(pair, pair + 1);
    }
    Some(SwapOutcome {
        pair,
        acceptance_prob,
        accepted,
    })
}
