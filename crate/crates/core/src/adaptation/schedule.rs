use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the three gain sequences to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gain {
    /// `γ_{n,1}`: temperature parameters.
    Temperature,
    /// `γ_{n,2}`: covariance/mean estimates, or the RAM factor.
    Covariance,
    /// `γ_{n,3}`: log scales.
    Scale,
}

impl Gain {
    fn index(self) -> usize {
        match self {
            Gain::Temperature => 0,
            Gain::Covariance => 1,
            Gain::Scale => 2,
        }
    }
}

/// Capped covariance gain `min{cap, multiplier · (n+1)^{−ξ₂}}` used with RAM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamStep {
    pub cap: f64,
    pub multiplier: f64,
}

impl RamStep {
    /// The default RAM gain for dimension `d`: `min{0.9, d (n+1)^{−0.6}}`.
    pub fn for_dimension(dim: usize) -> Self {
        Self {
            cap: 0.9,
            multiplier: dim as f64,
        }
    }
}

/// Polynomially decaying gains `γ_{n,i} = c_i (n+1)^{−ξ_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizeSchedule {
    pub c: [f64; 3],
    pub xi: [f64; 3],
    pub ram: Option<RamStep>,
}

impl Default for StepSizeSchedule {
    fn default() -> Self {
        Self {
            c: [1.0; 3],
            xi: [0.6; 3],
            ram: None,
        }
    }
}

impl StepSizeSchedule {
    /// All gains identically zero: the sampler becomes a fixed Markov kernel.
    pub fn frozen() -> Self {
        Self {
            c: [0.0; 3],
            ..Self::default()
        }
    }

    pub fn with_ram(mut self, ram: RamStep) -> Self {
        self.ram = Some(ram);
        self
    }

    #[inline]
    pub fn gamma(&self, n: u64, which: Gain) -> f64 {
        let i = which.index();
        let decay = ((n + 1) as f64).powf(-self.xi[i]);
        match (which, self.ram) {
            (Gain::Covariance, Some(ram)) if self.c[i] > 0.0 => ram.cap.min(ram.multiplier * decay),
            _ => self.c[i] * decay,
        }
    }

    /// Checks `c_i ≥ 0`, `c₂ ≤ 1`, `ξ_i ∈ (1/2, 1]` (so that `Σγ = ∞` and
    /// `Σγ_{n,1} γ_{n,j} < ∞`) and a RAM cap below one.
    pub fn validate(&self) -> Result<()> {
        for (i, &c) in self.c.iter().enumerate() {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::config(format!("c{}", i + 1), "gain constant must be finite and >= 0"));
            }
        }
        if self.c[1] > 1.0 {
            return Err(Error::config("c2", "covariance gain constant must be <= 1"));
        }
        for (i, &xi) in self.xi.iter().enumerate() {
            if !(xi > 0.5 && xi <= 1.0) {
                return Err(Error::config(format!("xi{}", i + 1), "decay exponent must lie in (1/2, 1]"));
            }
        }
        for j in 1..3 {
            if self.xi[0] + self.xi[j] <= 1.0 {
                return Err(Error::config(format!("xi{}", j + 1), "xi1 + xi_j must exceed 1"));
            }
        }
        if let Some(ram) = self.ram {
            if !(ram.cap > 0.0 && ram.cap < 1.0) || !(ram.multiplier > 0.0) {
                return Err(Error::config("ram_cap", "RAM gain cap must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_values() {
        let s = StepSizeSchedule::default();
        assert_eq!(s.gamma(0, Gain::Temperature), 1.0);
        assert_relative_eq!(s.gamma(1, Gain::Scale), 2f64.powf(-0.6), max_relative = 1e-15);
        assert_relative_eq!(s.gamma(1, Gain::Covariance), 0.659_753_955_386_447, epsilon = 1e-12);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn ram_gain_is_capped() {
        let s = StepSizeSchedule::default().with_ram(RamStep::for_dimension(8));
        assert_eq!(s.gamma(0, Gain::Covariance), 0.9);
        // 8 (n+1)^{-0.6} < 0.9 once n+1 > (8/0.9)^{1/0.6} ≈ 38.2
        assert_relative_eq!(s.gamma(99, Gain::Covariance), 8.0 * 100f64.powf(-0.6), max_relative = 1e-14);
        assert!(s.gamma(10_000, Gain::Covariance) < 0.9);
        assert_eq!(s.gamma(0, Gain::Temperature), 1.0);
        assert!((0..10_000).all(|n| s.gamma(n, Gain::Covariance) <= 0.9));
    }

    #[test]
    fn frozen_is_zero() {
        let s = StepSizeSchedule::frozen().with_ram(RamStep::for_dimension(2));
        assert!(s.validate().is_ok());
        for g in [Gain::Temperature, Gain::Covariance, Gain::Scale] {
            assert_eq!(s.gamma(5, g), 0.0);
        }
    }

    #[test]
    fn validation_rejects_bad_exponents() {
        let mut s = StepSizeSchedule::default();
        s.xi[0] = 0.5;
        assert!(s.validate().is_err());
        let mut s = StepSizeSchedule::default();
        s.c[1] = 1.5;
        assert!(matches!(s.validate(), Err(Error::Config { ref key, .. }) if key == "c2"));
        let s = StepSizeSchedule::default().with_ram(RamStep { cap: 1.0, multiplier: 2.0 });
        assert!(s.validate().is_err());
    }
}
