use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AdaptationMode, DEFAULT_ALPHA_STAR};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_lower, cholesky_rank_one, project_spd};

/// Which vector defines the RAM update direction `u = v / |v|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RamDirection {
    /// The proposal increment `Z = Y − X̄`.
    Increment,
    /// The standard normal draw before multiplication by the factor.
    Noise,
}

impl std::str::FromStr for RamDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "increment" => Ok(RamDirection::Increment),
            "noise" => Ok(RamDirection::Noise),
            other => Err(format!("unknown RAM direction `{other}` (expected increment or noise)")),
        }
    }
}

/// Constants shared by all proposal updates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalSettings {
    pub alpha_star: f64,
    /// Eigenvalues of every covariance estimate are kept in `[eps, 1/eps]`.
    pub eps_clamp: f64,
    pub log_scale_lo: f64,
    pub log_scale_hi: f64,
    pub ram_direction: RamDirection,
}

impl Default for ProposalSettings {
    fn default() -> Self {
        Self {
            alpha_star: DEFAULT_ALPHA_STAR,
            eps_clamp: 1e-6,
            log_scale_lo: -20.0,
            log_scale_hi: 20.0,
            ram_direction: RamDirection::Increment,
        }
    }
}

impl ProposalSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_star > 0.0 && self.alpha_star < 1.0) {
            return Err(Error::config("alpha_star", "must lie in (0, 1)"));
        }
        if !(self.eps_clamp > 0.0 && self.eps_clamp <= 1.0) {
            return Err(Error::config("eps_clamp", "must lie in (0, 1]"));
        }
        if !(self.log_scale_lo < self.log_scale_hi) || !self.log_scale_lo.is_finite() || !self.log_scale_hi.is_finite() {
            return Err(Error::config("t_lo", "need finite t_lo < t_hi"));
        }
        Ok(())
    }
}

/// Proposal parameters of one level.
///
/// In covariance modes `gamma` is the covariance estimate `Γ` and the proposal
/// covariance is `Σ = exp(T) Γ`. In RAM mode `gamma` is itself the lower
/// Cholesky factor of `Σ` and `T` is unused. `factor` always caches the lower
/// Cholesky factor of `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalShape {
    gamma: DMatrix<f64>,
    mu: DVector<f64>,
    log_scale: f64,
    chol_gamma: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl ProposalShape {
    /// `Γ = I`, `μ = 0`.
    pub fn identity(dim: usize, log_scale: f64) -> Self {
        let eye = DMatrix::identity(dim, dim);
        Self {
            factor: &eye * (0.5 * log_scale).exp(),
            chol_gamma: eye.clone(),
            gamma: eye,
            mu: DVector::zeros(dim),
            log_scale,
        }
    }

    /// A RAM-style shape with proposal covariance `factor · factorᵀ`; `factor`
    /// must be lower triangular with a positive diagonal.
    pub fn from_factor(factor: DMatrix<f64>) -> Result<Self> {
        let d = factor.nrows();
        if factor.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: factor.ncols() });
        }
        let lower = (0..d).all(|i| factor[(i, i)] > 0.0 && (i + 1..d).all(|j| factor[(i, j)] == 0.0));
        if !lower || factor.iter().any(|v| !v.is_finite()) {
            return Err(Error::Cholesky("factor must be lower triangular with a positive diagonal".into()));
        }
        Ok(Self {
            gamma: factor.clone(),
            chol_gamma: factor.clone(),
            factor,
            mu: DVector::zeros(d),
            log_scale: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Lower Cholesky factor of the proposal covariance.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }

    fn rescale(&mut self) {
        self.factor = &self.chol_gamma * (0.5 * self.log_scale).exp();
    }

    fn set_gamma(&mut self, gamma: DMatrix<f64>) {
        match cholesky_lower(&gamma) {
            Ok(chol) => {
                self.gamma = gamma;
                self.chol_gamma = chol;
                self.rescale();
            }
            Err(e) => log::warn!("keeping previous covariance estimate: {e}"),
        }
    }

    /// Adaptive Metropolis recursion with the pre-update mean:
    /// `Γ ← Π_Γ[(1−γ)Γ + γ (x−μ)(x−μ)ᵀ]`, then `μ ← (1−γ)μ + γx`.
    pub fn am_update(&mut self, x: &[f64], gamma2: f64, eps_clamp: f64) {
        if gamma2 == 0.0 {
            return;
        }
        let x = DVector::from_column_slice(x);
        let centered = &x - &self.mu;
        let raw = &self.gamma * (1.0 - gamma2) + &centered * centered.transpose() * gamma2;
        self.set_gamma(project_spd(&raw, eps_clamp));
        self.mu = &self.mu * (1.0 - gamma2) + x * gamma2;
    }

    /// `T ← Π_T(T + γ₃ (α − α*))` using the realized acceptance probability.
    pub fn scale_update(&mut self, acceptance_prob: f64, gamma3: f64, settings: &ProposalSettings) {
        if gamma3 == 0.0 {
            return;
        }
        self.log_scale = (self.log_scale + gamma3 * (acceptance_prob - settings.alpha_star))
            .clamp(settings.log_scale_lo, settings.log_scale_hi);
        self.rescale();
    }

    /// Robust adaptive Metropolis:
    /// `Γ'Γ'ᵀ = Γ [I + γ₂ (α − α*) u uᵀ] Γᵀ` with `u = v/|v|`, as a rank-one
    /// Cholesky update or downdate of the factor.
    ///
    /// A zero direction or `α = α*` leaves the factor unchanged. A downdate
    /// that would lose definiteness is skipped with a warning.
    pub fn ram_update(&mut self, direction: &[f64], acceptance_prob: f64, gamma2: f64, alpha_star: f64) {
        let coef = gamma2 * (acceptance_prob - alpha_star);
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if coef == 0.0 || norm == 0.0 || !norm.is_finite() {
            return;
        }
        let u = DVector::from_iterator(direction.len(), direction.iter().map(|v| v / norm));
        let mut v = &self.factor * u * coef.abs().sqrt();
        let mut updated = self.factor.clone();
        match cholesky_rank_one(&mut updated, &mut v, coef.signum()) {
            Ok(()) => {
                self.gamma.copy_from(&updated);
                self.chol_gamma.copy_from(&updated);
                self.factor = updated;
            }
            Err(e) => log::warn!("skipping RAM update: {e}"),
        }
    }
}

/// Proposal adaptation state of all levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CovAdaptState {
    mode: AdaptationMode,
    settings: ProposalSettings,
    levels: Vec<ProposalShape>,
    // pooled (Γ, μ) of the global mode
    shared: Option<ProposalShape>,
}

impl CovAdaptState {
    /// `Γ = I`, `μ = 0` and log scale `initial_log_scale` at every level.
    pub fn new(mode: AdaptationMode, dim: usize, levels: usize, settings: ProposalSettings, initial_log_scale: f64) -> Self {
        let log_scale = match mode {
            AdaptationMode::Ram => 0.0,
            _ => initial_log_scale,
        };
        let shared = (mode == AdaptationMode::CovGlobal).then(|| ProposalShape::identity(dim, 0.0));
        Self {
            mode,
            settings,
            levels: vec![ProposalShape::identity(dim, log_scale); levels],
            shared,
        }
    }

    pub fn mode(&self) -> AdaptationMode {
        self.mode
    }

    pub fn settings(&self) -> &ProposalSettings {
        &self.settings
    }

    pub fn levels(&self) -> &[ProposalShape] {
        &self.levels
    }

    pub fn levels_mut(&mut self) -> &mut [ProposalShape] {
        &mut self.levels
    }

    pub fn level(&self, level: usize) -> &ProposalShape {
        &self.levels[level]
    }

    /// The pooled estimate in global mode.
    pub fn shared(&self) -> Option<&ProposalShape> {
        self.shared.as_ref()
    }

    pub fn factor(&self, level: usize) -> &DMatrix<f64> {
        self.levels[level].factor()
    }

    /// Per-level covariance and mean update.
    pub fn am_update(&mut self, level: usize, x: &[f64], gamma2: f64) {
        debug_assert_eq!(self.mode, AdaptationMode::Cov);
        let eps = self.settings.eps_clamp;
        self.levels[level].am_update(x, gamma2, eps);
    }

    /// Pooled update
    /// `Γ ← Π_Γ[(1−γ)Γ + (γ/L) Σ_ℓ (x_ℓ−μ)(x_ℓ−μ)ᵀ]`, `μ ← (1−γ)μ + (γ/L) Σ_ℓ x_ℓ`,
    /// after which every level uses `Σ_ℓ = exp(T_ℓ) Γ`.
    pub fn global_am_update<X: AsRef<[f64]>>(&mut self, xs: &[X], gamma2: f64) {
        debug_assert_eq!(self.mode, AdaptationMode::CovGlobal);
        if gamma2 == 0.0 || xs.is_empty() {
            return;
        }
        let shared = self.shared.as_mut().expect("global mode keeps a shared estimate");
        let d = shared.dim();
        let weight = gamma2 / xs.len() as f64;
        let mut raw = &shared.gamma * (1.0 - gamma2);
        let mut mean_term = DVector::zeros(d);
        for x in xs {
            let x = DVector::from_column_slice(x.as_ref());
            let centered = &x - &shared.mu;
            raw += &centered * centered.transpose() * weight;
            mean_term += x * weight;
        }
        shared.set_gamma(project_spd(&raw, self.settings.eps_clamp));
        shared.mu = &shared.mu * (1.0 - gamma2) + mean_term;
        for level in &mut self.levels {
            level.gamma.copy_from(&shared.gamma);
            level.chol_gamma.copy_from(&shared.chol_gamma);
            level.mu.copy_from(&shared.mu);
            level.rescale();
        }
    }

    pub fn scale_update(&mut self, level: usize, acceptance_prob: f64, gamma3: f64) {
        debug_assert_ne!(self.mode, AdaptationMode::Ram);
        let settings = self.settings;
        self.levels[level].scale_update(acceptance_prob, gamma3, &settings);
    }

    /// RAM factor update at one level; `direction` is the increment or the
    /// noise vector depending on [`ProposalSettings::ram_direction`].
    pub fn ram_update(&mut self, level: usize, direction: &[f64], acceptance_prob: f64, gamma2: f64) {
        debug_assert_eq!(self.mode, AdaptationMode::Ram);
        let alpha_star = self.settings.alpha_star;
        self.levels[level].ram_update(direction, acceptance_prob, gamma2, alpha_star);
    }
}
