//! The inverse-temperature ladder and its unconstrained parameterization.
//!
//! `β₁ = 1` and `β_{ℓ+1} = β_ℓ · exp(−exp(ρ_ℓ))`, so any finite `ρ` yields a
//! strictly decreasing ladder. Log inverse temperatures are kept alongside the
//! plain values since `β_L` underflows for large `ρ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Projection interval for every component of `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for RhoBounds {
    fn default() -> Self {
        Self { lo: -10.0, hi: 10.0 }
    }
}

impl RhoBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("rho_lo", format!("need finite rho_lo < rho_hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }
}

/// The temperature parameters `ρ₁..ρ_{L−1}`, always inside their bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoVector {
    rho: Vec<f64>,
    bounds: RhoBounds,
}

impl RhoVector {
    /// `levels − 1` components all equal to `value` (projected).
    pub fn constant(levels: usize, value: f64, bounds: RhoBounds) -> Self {
        project_rho(&vec![value; levels.saturating_sub(1)], bounds)
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    pub fn bounds(&self) -> RhoBounds {
        self.bounds
    }

    /// Number of levels `L` the vector parameterizes.
    pub fn levels(&self) -> usize {
        self.rho.len() + 1
    }

    /// Adds `increment[ℓ]` to each component and projects.
    pub fn step(&mut self, increment: &[f64]) {
        debug_assert_eq!(increment.len(), self.rho.len());
        for (r, inc) in self.rho.iter_mut().zip(increment) {
            *r = self.bounds.clamp(*r + inc);
        }
    }
}

/// Componentwise projection onto `[lo, hi]`. Non-finite inputs map to the
/// nearest bound (`NaN` to `lo`).
pub fn project_rho(raw: &[f64], bounds: RhoBounds) -> RhoVector {
    let rho = raw
        .iter()
        .map(|&v| if v.is_nan() { bounds.lo } else { bounds.clamp(v) })
        .collect();
    RhoVector { rho, bounds }
}

/// A strictly decreasing ladder `1 = β₁ > … > β_L > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaLadder {
    betas: Vec<f64>,
    log_betas: Vec<f64>,
    // β_ℓ − β_{ℓ+1}, computed without cancellation
    deltas: Vec<f64>,
}

impl BetaLadder {
    /// The single-level ladder `β = (1)`.
    pub fn single() -> Self {
        Self {
            betas: vec![1.0],
            log_betas: vec![0.0],
            deltas: Vec::new(),
        }
    }

    pub fn levels(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn log_betas(&self) -> &[f64] {
        &self.log_betas
    }

    #[inline]
    pub fn beta(&self, level: usize) -> f64 {
        self.betas[level]
    }

    /// `β_j − β_{j+1}` for adjacent pair `j` (0-based, `j < L − 1`).
    #[inline]
    pub fn delta(&self, pair: usize) -> f64 {
        self.deltas[pair]
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

/// Maps `ρ` to the ladder through `log β_{ℓ+1} = −Σ_{i≤ℓ} exp(ρ_i)`.
pub fn beta_from_rho(rho: &RhoVector) -> BetaLadder {
    let levels = rho.levels();
    let mut log_betas = Vec::with_capacity(levels);
    let mut deltas = Vec::with_capacity(levels - 1);
    let mut log_beta = 0.0f64;
    log_betas.push(log_beta);
    for &r in rho.values() {
        // β_ℓ − β_{ℓ+1} = β_ℓ (1 − exp(−exp ρ_ℓ))
        let e = r.exp();
        deltas.push(log_beta.exp() * -(-e).exp_m1());
        log_beta -= e;
        log_betas.push(log_beta);
    }
    let betas = log_betas.iter().map(|lb| lb.exp()).collect();
    BetaLadder {
        betas,
        log_betas,
        deltas,
    }
}

/// `Δβ_ℓ = β_ℓ − β_{ℓ+1}` for 0-based pair `level`.
pub fn delta_beta(rho: &RhoVector, level: usize) -> Result<f64> {
    if level >= rho.values().len() {
        return Err(Error::OutOfRange {
            what: "ladder pair",
            index: level,
            limit: rho.values().len(),
        });
    }
    Ok(beta_from_rho(rho).delta(level))
}

/// Inverse map `ρ_ℓ = log(log β_ℓ − log β_{ℓ+1})` for a valid ladder.
pub fn rho_from_betas(betas: &[f64]) -> Result<Vec<f64>> {
    if betas.first() != Some(&1.0) {
        return Err(Error::config("betas", "ladder must start at exactly 1"));
    }
    let mut out = Vec::with_capacity(betas.len().saturating_sub(1));
    for w in betas.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(Error::config("betas", "ladder must be strictly decreasing and positive"));
        }
        out.push((w[0].ln() - w[1].ln()).ln());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rho(values: &[f64]) -> RhoVector {
        project_rho(values, RhoBounds::default())
    }

    #[test]
    fn zeros_give_powers_of_inverse_e() {
        let ladder = beta_from_rho(&rho(&[0.0; 4]));
        for (k, &b) in ladder.betas().iter().enumerate() {
            assert_relative_eq!(b, (-(k as f64)).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn log_log_two_halves() {
        let r = rho(&[2f64.ln().ln()]);
        let ladder = beta_from_rho(&r);
        assert_eq!(ladder.betas()[0], 1.0);
        assert_relative_eq!(ladder.betas()[1], 0.5, max_relative = 1e-15);
        assert_relative_eq!(delta_beta(&r, 0).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn deltas_positive_at_lower_bound() {
        let r = RhoVector::constant(6, -1e3, RhoBounds::default());
        assert!(r.values().iter().all(|&v| v == -10.0));
        let ladder = beta_from_rho(&r);
        assert!(ladder.deltas().iter().all(|&d| d > 0.0));
        assert!(ladder.betas().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn delta_out_of_range() {
        assert!(matches!(delta_beta(&rho(&[0.0]), 1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn projection_cases() {
        let b = RhoBounds::new(-2.0, 3.0).unwrap();
        assert_eq!(project_rho(&[0.5], b).values(), &[0.5]);
        assert_eq!(project_rho(&[7.0], b).values(), &[3.0]);
        assert_eq!(project_rho(&[-7.0], b).values(), &[-2.0]);
        assert_eq!(project_rho(&[f64::INFINITY, f64::NAN], b).values(), &[3.0, -2.0]);
        assert!(RhoBounds::new(1.0, 1.0).is_err());
    }

    #[test]
    fn upper_bound_ladder_stays_representable_in_log_space() {
        let ladder = beta_from_rho(&RhoVector::constant(4, 10.0, RhoBounds::default()));
        assert!(ladder.log_betas().iter().all(|v| v.is_finite()));
        assert!(ladder.log_betas().windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn ladder_invariants(values in proptest::collection::vec(-10.0f64..3.0, 1..12)) {
            let ladder = beta_from_rho(&rho(&values));
            prop_assert_eq!(ladder.betas()[0], 1.0);
            prop_assert!(ladder.betas().windows(2).all(|w| w[1] < w[0]));
            prop_assert!(*ladder.betas().last().unwrap() > 0.0);
            for (j, d) in ladder.deltas().iter().enumerate() {
                let direct = ladder.betas()[j] - ladder.betas()[j + 1];
                prop_assert!((d - direct).abs() <= 1e-14 + 1e-12 * direct.abs());
            }
        }

        #[test]
        fn increasing_one_component_cools_only_later_levels(
            values in proptest::collection::vec(-5.0f64..2.0, 2..8),
            pick in 0usize..8,
            bump in 0.01f64..1.0,
        ) {
            let l = pick % values.len();
            let base = beta_from_rho(&rho(&values));
            let mut raised = values.clone();
            raised[l] += bump;
            let after = beta_from_rho(&rho(&raised));
            for k in 0..base.levels() {
                if k <= l {
                    prop_assert_eq!(base.log_betas()[k], after.log_betas()[k]);
                } else {
                    prop_assert!(after.log_betas()[k] < base.log_betas()[k]);
                }
            }
        }

        #[test]
        fn inverse_map_round_trips(values in proptest::collection::vec(-4.0f64..1.5, 1..10)) {
            let ladder = beta_from_rho(&rho(&values));
            let back = rho_from_betas(ladder.betas()).unwrap();
            for (a, b) in values.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-10, "{} vs {}", a, b);
            }
        }
    }
}
