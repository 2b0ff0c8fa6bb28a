//! Sampler configuration and its flat `key = value` text format.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are rejected.
//! [`SamplerConfig::to_text`] writes every key with its resolved value, so a
//! written configuration reproduces a run exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::adaptation::{AdaptationMode, ProposalSettings, RamDirection, RamStep, StepSizeSchedule};
use crate::error::{Error, Result};
use crate::io::read_image;
use crate::ladder::RhoBounds;
use crate::parallel::Execution;
use crate::target::{
    ContinuousModel, FlatDensity, GaussianMixture, GaussianMixtureSpec, IsingPosterior,
    IsingPosteriorSpec, IsotropicGaussian, TargetDensity, synthetic_image,
};

/// Where mixture parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureSource {
    /// The bundled twenty-component bivariate mixture, σ² = 0.01.
    Canonical,
    /// The bundled means zero-padded to `d = 8`, σ² = 0.001.
    CanonicalHard,
    File(PathBuf),
}

/// Where the observed Ising image comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    /// The bundled symmetric synthetic image of the given size.
    Synthetic { rows: usize, cols: usize },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    Mixture(MixtureSource),
    Gaussian { dim: usize },
    /// Improper flat density; for tests only.
    Flat { dim: usize },
    Ising { image: ImageSource, alpha: f64, beta: f64 },
}

impl TargetSpec {
    pub fn canonical_ising() -> Self {
        TargetSpec::Ising {
            image: ImageSource::Synthetic { rows: 40, cols: 40 },
            alpha: 1.0,
            beta: 0.7,
        }
    }

    /// Loads any referenced files and builds the density.
    pub fn build(&self) -> Result<TargetDensity> {
        Ok(match self {
            TargetSpec::Mixture(source) => {
                TargetDensity::Continuous(ContinuousModel::Mixture(GaussianMixture::new(self.mixture_spec(source)?)?))
            }
            TargetSpec::Gaussian { dim } => {
                TargetDensity::Continuous(ContinuousModel::Gaussian(IsotropicGaussian::standard(*dim)))
            }
            TargetSpec::Flat { dim } => TargetDensity::Continuous(ContinuousModel::Flat(FlatDensity { dim: *dim })),
            TargetSpec::Ising { image, alpha, beta } => {
                let observed = match image {
                    ImageSource::Synthetic { rows, cols } => synthetic_image(*rows, *cols),
                    ImageSource::File(path) => read_image(path)?,
                };
                TargetDensity::Lattice(IsingPosterior::new(IsingPosteriorSpec {
                    observed,
                    alpha: *alpha,
                    beta: *beta,
                })?)
            }
        })
    }

    fn mixture_spec(&self, source: &MixtureSource) -> Result<GaussianMixtureSpec> {
        match source {
            MixtureSource::Canonical => Ok(GaussianMixtureSpec::canonical()),
            MixtureSource::CanonicalHard => Ok(GaussianMixtureSpec::canonical_hard()),
            MixtureSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::config("mixture_file", format!("{}: {e}", path.display())))?;
                GaussianMixtureSpec::parse(&text, &path.display().to_string())
            }
        }
    }

    /// Exact level-1 moments `(E[X_i], E[X_i²])` when the target has them.
    pub fn true_moments(&self) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
        Ok(match self {
            TargetSpec::Mixture(source) => Some(self.mixture_spec(source)?.moments()),
            TargetSpec::Gaussian { dim } => Some((vec![0.0; *dim], vec![1.0; *dim])),
            _ => None,
        })
    }
}

/// Everything a sampler run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub target: TargetSpec,
    /// Number of temperature levels `L`.
    pub levels: usize,
    /// Total iterations `N`.
    pub iterations: u64,
    /// Iterations excluded from the estimators; defaults to `N / 2`.
    pub burn_in: u64,
    pub adaptation: AdaptationMode,
    pub schedule: StepSizeSchedule,
    /// Use the capped RAM covariance gain `min{0.9, d (n+1)^{−ξ₂}}` in RAM mode.
    pub ram_capped_gain: bool,
    pub proposal: ProposalSettings,
    pub rho_bounds: RhoBounds,
    pub rho_init: f64,
    pub log_scale_init: f64,
    /// Adapt a single `ρ` shared by all pairs.
    pub geometric: bool,
    pub seed: u64,
    /// Emit one trace record every `thin` iterations.
    pub thin: u64,
    /// Box `[lo, hi]^d` for the uniform initial states; target default when `None`.
    pub init_box: Option<(f64, f64)>,
    pub freeze_after_burn_in: bool,
    /// Include the level-1 state in trace records.
    pub record_state: bool,
    /// Fan per-level kernel and adaptation steps out to worker threads.
    pub level_execution: Execution,
}

impl SamplerConfig {
    pub fn new(target: TargetSpec) -> Self {
        Self {
            target,
            levels: 5,
            iterations: 5000,
            burn_in: 2500,
            adaptation: AdaptationMode::Cov,
            schedule: StepSizeSchedule::default(),
            ram_capped_gain: true,
            proposal: ProposalSettings::default(),
            rho_bounds: RhoBounds::default(),
            rho_init: 1.0,
            log_scale_init: 0.0,
            geometric: false,
            seed: 1,
            thin: 10,
            init_box: None,
            freeze_after_burn_in: false,
            record_state: false,
            level_execution: Execution::Sequential,
        }
    }

    /// Sets `N` and the default burn-in `N / 2`.
    pub fn with_iterations(mut self, iterations: u64) -> Self {
        self.iterations = iterations;
        self.burn_in = iterations / 2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::config("levels", "need at least one level"));
        }
        if self.iterations == 0 {
            return Err(Error::config("iters", "need at least one iteration"));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::config("burnin", "burn-in must be smaller than the number of iterations"));
        }
        if self.thin == 0 {
            return Err(Error::config("thin", "thinning interval must be >= 1"));
        }
        if !self.rho_init.is_finite() {
            return Err(Error::config("rho_init", "must be finite"));
        }
        if !self.log_scale_init.is_finite() {
            return Err(Error::config("t_init", "must be finite"));
        }
        if let Some((lo, hi)) = self.init_box {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::config("init_lo", "need finite init_lo < init_hi"));
            }
        }
        match &self.target {
            TargetSpec::Gaussian { dim } | TargetSpec::Flat { dim } if *dim == 0 => {
                return Err(Error::config("dim", "dimension must be positive"));
            }
            TargetSpec::Ising { image: ImageSource::Synthetic { rows, cols }, .. } if *rows == 0 || *cols == 0 => {
                return Err(Error::config("image_rows", "image must be non-empty"));
            }
            _ => {}
        }
        RhoBounds::new(self.rho_bounds.lo, self.rho_bounds.hi)?;
        self.schedule.validate()?;
        self.proposal.validate()
    }

    /// The step-size schedule with the RAM gain resolved for dimension `dim`.
    pub fn resolved_schedule(&self, dim: usize) -> StepSizeSchedule {
        let mut schedule = self.schedule;
        schedule.ram = (self.adaptation == AdaptationMode::Ram && self.ram_capped_gain)
            .then(|| RamStep::for_dimension(dim));
        schedule
    }

    /// Parses the flat configuration format. Relative file paths resolve
    /// against `base_dir`.
    pub fn from_text(text: &str, source_name: &str, base_dir: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source_name, idx + 1, "expected `key = value`"))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(key, "key given more than once"));
            }
        }
        let target = target_from_entries(&mut entries, base_dir)?;
        let mut config = SamplerConfig::new(target);
        let burn_in_given = entries.contains_key("burnin");
        for (key, value) in &entries {
            config.set(key, value)?;
        }
        if !burn_in_given {
            config.burn_in = config.iterations / 2;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_text(&text, &path.display().to_string(), base)
    }

    /// Sets one non-target key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "levels" => self.levels = parse(key, v)?,
            "iters" => self.iterations = parse(key, v)?,
            "burnin" => self.burn_in = parse(key, v)?,
            "adaptation" => self.adaptation = v.parse().map_err(|e: String| Error::config(key, e))?,
            "seed" => self.seed = parse(key, v)?,
            "thin" => self.thin = parse(key, v)?,
            "alpha_star" => self.proposal.alpha_star = parse(key, v)?,
            "eps_clamp" => self.proposal.eps_clamp = parse(key, v)?,
            "t_lo" => self.proposal.log_scale_lo = parse(key, v)?,
            "t_hi" => self.proposal.log_scale_hi = parse(key, v)?,
            "t_init" => self.log_scale_init = parse(key, v)?,
            "ram_direction" => self.proposal.ram_direction = v.parse().map_err(|e: String| Error::config(key, e))?,
            "ram_gain" => {
                self.ram_capped_gain = match v {
                    "capped" => true,
                    "plain" => false,
                    _ => return Err(Error::config(key, "expected `capped` or `plain`")),
                }
            }
            "rho_lo" => self.rho_bounds.lo = parse(key, v)?,
            "rho_hi" => self.rho_bounds.hi = parse(key, v)?,
            "rho_init" => self.rho_init = parse(key, v)?,
            "c1" => self.schedule.c[0] = parse(key, v)?,
            "c2" => self.schedule.c[1] = parse(key, v)?,
            "c3" => self.schedule.c[2] = parse(key, v)?,
            "xi1" => self.schedule.xi[0] = parse(key, v)?,
            "xi2" => self.schedule.xi[1] = parse(key, v)?,
            "xi3" => self.schedule.xi[2] = parse(key, v)?,
            "geometric" => self.geometric = parse(key, v)?,
            "freeze_after_burnin" => self.freeze_after_burn_in = parse(key, v)?,
            "record_state" => self.record_state = parse(key, v)?,
            "level_parallel" => {
                self.level_execution = if parse::<bool>(key, v)? { Execution::Parallel } else { Execution::Sequential }
            }
            "init_lo" => {
                let lo = parse(key, v)?;
                self.init_box = Some((lo, self.init_box.map_or(f64::INFINITY, |b| b.1)));
            }
            "init_hi" => {
                let hi = parse(key, v)?;
                self.init_box = Some((self.init_box.map_or(f64::NEG_INFINITY, |b| b.0), hi));
            }
            other => return Err(Error::config(other, "unknown configuration key")),
        }
        Ok(())
    }

    /// Every key with its resolved value, in the format [`Self::from_text`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.target {
            TargetSpec::Mixture(MixtureSource::Canonical) => kv("target", "mixture".into()),
            TargetSpec::Mixture(MixtureSource::CanonicalHard) => kv("target", "mixture_hard".into()),
            TargetSpec::Mixture(MixtureSource::File(p)) => {
                kv("target", "mixture".into());
                kv("mixture_file", p.display().to_string());
            }
            TargetSpec::Gaussian { dim } => {
                kv("target", "gaussian".into());
                kv("dim", dim.to_string());
            }
            TargetSpec::Flat { dim } => {
                kv("target", "flat".into());
                kv("dim", dim.to_string());
            }
            TargetSpec::Ising { image, alpha, beta } => {
                kv("target", "ising".into());
                match image {
                    ImageSource::Synthetic { rows, cols } => {
                        kv("image_rows", rows.to_string());
                        kv("image_cols", cols.to_string());
                    }
                    ImageSource::File(p) => kv("image_file", p.display().to_string()),
                }
                kv("ising_alpha", alpha.to_string());
                kv("ising_beta", beta.to_string());
            }
        }
        kv("levels", self.levels.to_string());
        kv("iters", self.iterations.to_string());
        kv("burnin", self.burn_in.to_string());
        kv("adaptation", self.adaptation.to_string());
        kv("seed", self.seed.to_string());
        kv("thin", self.thin.to_string());
        kv("alpha_star", self.proposal.alpha_star.to_string());
        kv("eps_clamp", self.proposal.eps_clamp.to_string());
        kv("t_lo", self.proposal.log_scale_lo.to_string());
        kv("t_hi", self.proposal.log_scale_hi.to_string());
        kv("t_init", self.log_scale_init.to_string());
        let dir = match self.proposal.ram_direction {
            RamDirection::Increment => "increment",
            RamDirection::Noise => "noise",
        };
        kv("ram_direction", dir.into());
        kv("ram_gain", if self.ram_capped_gain { "capped" } else { "plain" }.into());
        kv("rho_lo", self.rho_bounds.lo.to_string());
        kv("rho_hi", self.rho_bounds.hi.to_string());
        kv("rho_init", self.rho_init.to_string());
        for i in 0..3 {
            kv(&format!("c{}", i + 1), self.schedule.c[i].to_string());
        }
        for i in 0..3 {
            kv(&format!("xi{}", i + 1), self.schedule.xi[i].to_string());
        }
        kv("geometric", self.geometric.to_string());
        kv("freeze_after_burnin", self.freeze_after_burn_in.to_string());
        kv("record_state", self.record_state.to_string());
        kv("level_parallel", self.level_execution.is_parallel().to_string());
        if let Some((lo, hi)) = self.init_box {
            kv("init_lo", lo.to_string());
            kv("init_hi", hi.to_string());
        }
        out
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self::new(TargetSpec::Mixture(MixtureSource::Canonical))
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

fn target_from_entries(entries: &mut BTreeMap<String, String>, base_dir: &Path) -> Result<TargetSpec> {
    let kind = entries.remove("target").unwrap_or_else(|| "mixture".to_string());
    let mut take = |k: &str| entries.remove(k);
    let resolve = |p: String| {
        let p = PathBuf::from(p);
        if p.is_relative() { base_dir.join(p) } else { p }
    };
    let target = match kind.as_str() {
        "mixture" => match take("mixture_file") {
            Some(p) => TargetSpec::Mixture(MixtureSource::File(resolve(p))),
            None => TargetSpec::Mixture(MixtureSource::Canonical),
        },
        "mixture_hard" => TargetSpec::Mixture(MixtureSource::CanonicalHard),
        "gaussian" | "flat" => {
            let dim = take("dim").map(|v| parse("dim", &v)).transpose()?.unwrap_or(1);
            if kind == "gaussian" { TargetSpec::Gaussian { dim } } else { TargetSpec::Flat { dim } }
        }
        "ising" => {
            let image = match take("image_file") {
                Some(p) => ImageSource::File(resolve(p)),
                None => ImageSource::Synthetic {
                    rows: take("image_rows").map(|v| parse("image_rows", &v)).transpose()?.unwrap_or(40),
                    cols: take("image_cols").map(|v| parse("image_cols", &v)).transpose()?.unwrap_or(40),
                },
            };
            let alpha = take("ising_alpha").map(|v| parse("ising_alpha", &v)).transpose()?.unwrap_or(1.0);
            let beta = take("ising_beta").map(|v| parse("ising_beta", &v)).transpose()?.unwrap_or(0.7);
            TargetSpec::Ising { image, alpha, beta }
        }
        other => return Err(Error::config("target", format!("unknown target `{other}`"))),
    };
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut config = SamplerConfig::new(TargetSpec::Gaussian { dim: 3 });
        config.levels = 4;
        config.adaptation = AdaptationMode::Ram;
        config.init_box = Some((-2.0, 2.5));
        config.schedule.c[0] = 0.5;
        config.proposal.ram_direction = RamDirection::Noise;
        let text = config.to_text();
        let back = SamplerConfig::from_text(&text, "round-trip", Path::new(".")).unwrap();
        assert_eq!(config, back);

        let ising = SamplerConfig::new(TargetSpec::canonical_ising());
        let back = SamplerConfig::from_text(&ising.to_text(), "ising", Path::new(".")).unwrap();
        assert_eq!(ising, back);
    }

    #[test]
    fn defaults_and_burn_in() {
        let config = SamplerConfig::from_text("target = mixture\niters = 100\n", "c", Path::new(".")).unwrap();
        assert_eq!(config.burn_in, 50);
        assert_eq!(config.levels, 5);
        assert_eq!(config.thin, 10);
        assert_eq!(config.rho_init, 1.0);
    }

    #[test]
    fn errors_name_the_key() {
        let err = SamplerConfig::from_text("levels = many\n", "c", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "levels"));
        let err = SamplerConfig::from_text("colour = blue\n", "c", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "colour"));
        let err = SamplerConfig::from_text("iters = 10\nburnin = 10\n", "c", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "burnin"));
        let err = SamplerConfig::from_text("target = torus\n", "c", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "target"));
        let err = SamplerConfig::from_text("xi1 = 0.4\n", "c", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "xi1"));
    }

    #[test]
    fn ram_schedule_resolution() {
        let mut config = SamplerConfig::new(TargetSpec::Mixture(MixtureSource::CanonicalHard));
        assert!(config.resolved_schedule(8).ram.is_none());
        config.adaptation = AdaptationMode::Ram;
        assert_eq!(config.resolved_schedule(8).ram, Some(RamStep::for_dimension(8)));
    }
}
