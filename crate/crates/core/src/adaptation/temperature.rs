use crate::kernels::swap_acceptance_with_delta;
use crate::ladder::{beta_from_rho, BetaLadder, RhoVector};

/// Temperature adaptation state: the parameters `ρ` and the target swap
/// acceptance rate `α*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TempAdaptState {
    rho: RhoVector,
    ladder: BetaLadder,
    alpha_star: f64,
    geometric: bool,
}

impl TempAdaptState {
    pub fn new(rho: RhoVector, alpha_star: f64) -> Self {
        let ladder = beta_from_rho(&rho);
        Self {
            rho,
            ladder,
            alpha_star,
            geometric: false,
        }
    }

    /// Shares one `ρ` across all pairs (geometric ladder). Every component is
    /// moved by the mean of the per-pair increments.
    pub fn geometric(mut self) -> Self {
        self.geometric = true;
        self
    }

    pub fn rho(&self) -> &RhoVector {
        &self.rho
    }

    /// The ladder implied by the current `ρ`.
    pub fn ladder(&self) -> &BetaLadder {
        &self.ladder
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    /// One stochastic-approximation step
    /// `ρ_ℓ ← Π(ρ_ℓ + γ₁ (ϖ̂_ℓ − α*))` for every pair simultaneously, where
    /// `ϖ̂_ℓ` is the swap acceptance probability of pair `ℓ` at the current
    /// states under the pre-update ladder.
    ///
    /// Returns the per-pair probabilities `ϖ̂_ℓ`.
    pub fn update(&mut self, log_pi: &[f64], gamma1: f64) -> Vec<f64> {
        debug_assert_eq!(log_pi.len(), self.ladder.levels());
        let probs: Vec<f64> = (0..self.ladder.levels().saturating_sub(1))
            .map(|j| swap_acceptance_with_delta(self.ladder.delta(j), log_pi[j], log_pi[j + 1]))
            .collect();
        if gamma1 == 0.0 || probs.is_empty() {
            return probs;
        }
        let increments: Vec<f64> = if self.geometric {
            let mean_h = probs.iter().map(|p| p - self.alpha_star).sum::<f64>() / probs.len() as f64;
            vec![gamma1 * mean_h; probs.len()]
        } else {
            probs.iter().map(|p| gamma1 * (p - self.alpha_star)).collect()
        };
        self.rho.step(&increments);
        self.ladder = beta_from_rho(&self.rho);
        probs
    }
}

/// Functional form of [`TempAdaptState::update`].
pub fn temp_update(state: &TempAdaptState, log_pi: &[f64], gamma1: f64) -> (TempAdaptState, Vec<f64>) {
    let mut next = state.clone();
    let probs = next.update(log_pi, gamma1);
    (next, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{RhoBounds, RhoVector};
    use approx::assert_relative_eq;

    #[test]
    fn equal_log_pi_pushes_every_rho_up() {
        let state = TempAdaptState::new(RhoVector::constant(5, 1.0, RhoBounds::default()), 0.234);
        let (next, probs) = temp_update(&state, &[-2.0; 5], 0.1);
        assert!(probs.iter().all(|&p| p == 1.0));
        for &r in next.rho().values() {
            assert_relative_eq!(r, 1.0 + 0.766 * 0.1, max_relative = 1e-14);
        }
    }

    #[test]
    fn probability_at_target_leaves_rho_unchanged() {
        // choose log π so that Δβ (lπ₂ − lπ₁) = log α*
        let state = TempAdaptState::new(RhoVector::constant(2, 0.0, RhoBounds::default()), 0.234);
        let delta = state.ladder().delta(0);
        let log_pi = [0.0, 0.234f64.ln() / delta];
        let (next, probs) = temp_update(&state, &log_pi, 0.5);
        assert_relative_eq!(probs[0], 0.234, max_relative = 1e-12);
        assert!((next.rho().values()[0] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn projection_saturates() {
        let mut state = TempAdaptState::new(RhoVector::constant(3, 9.9, RhoBounds::default()), 0.234);
        for _ in 0..10 {
            state.update(&[0.0; 3], 1.0);
        }
        assert!(state.rho().values().iter().all(|&r| r == 10.0));
        assert!(state.ladder().log_betas().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn geometric_keeps_components_equal() {
        let mut state = TempAdaptState::new(RhoVector::constant(4, 0.5, RhoBounds::default()), 0.234).geometric();
        state.update(&[0.0, -10.0, -1.0, -1.0], 0.3);
        let r = state.rho().values();
        assert!(r.iter().all(|&v| v == r[0]));
    }
}
