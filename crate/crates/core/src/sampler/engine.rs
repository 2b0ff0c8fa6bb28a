//! Per-level kernels plugged into the parallel tempering loop.

use rand::Rng;

use crate::adaptation::{AdaptationMode, CovAdaptState, RamDirection};
use crate::kernels::{flip_step, rwm_step};
use crate::parallel::{for_each_mut, Execution};
use crate::rng::StreamRng;
use crate::target::{ContinuousTarget, IsingPosterior, IsingState};

/// What one level's kernel step reports back to the adaptation.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStep {
    pub acceptance_prob: f64,
    pub accepted: bool,
    /// RAM update direction (empty for engines that do not need it).
    pub direction: Vec<f64>,
}

/// Gains of the proposal adaptation for one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalGains {
    pub covariance: f64,
    pub scale: f64,
}

/// The within-level part of the algorithm: evaluating the target, moving one
/// level, and adapting the proposals from the iteration's outcomes.
pub trait LevelEngine: Send + Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn log_density(&self, x: &Self::Point) -> f64;

    fn initial_point(&self, rng: &mut StreamRng) -> Self::Point;

    /// One kernel step at `level` targeting `π^β`; updates `x` and its cached
    /// log density in place.
    fn propagate(&self, level: usize, x: &mut Self::Point, log_pi: &mut f64, beta: f64, rng: &mut StreamRng) -> LevelStep;

    /// Adapts the proposals given the post-move states and the step outcomes.
    fn adapt(&mut self, states: &[Self::Point], steps: &[LevelStep], gains: ProposalGains, exec: Execution);

    /// Per-level log scales, if the engine has them.
    fn log_scales(&self) -> Option<Vec<f64>>;

    /// Number of coordinates exposed to the estimators.
    fn coord_count(&self) -> usize;

    fn write_coords(&self, x: &Self::Point, out: &mut [f64]);

    /// Dimension driving the RAM gain, if any.
    fn dim(&self) -> usize {
        self.coord_count()
    }
}

/// Tempered random-walk Metropolis with adaptive Gaussian proposals.
#[derive(Debug, Clone)]
pub struct RwmEngine<T> {
    target: T,
    proposals: CovAdaptState,
    init_box: (f64, f64),
}

impl<T: ContinuousTarget> RwmEngine<T> {
    pub fn new(target: T, proposals: CovAdaptState, init_box: (f64, f64)) -> Self {
        Self {
            target,
            proposals,
            init_box,
        }
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn proposals(&self) -> &CovAdaptState {
        &self.proposals
    }
}

impl<T: ContinuousTarget> LevelEngine for RwmEngine<T> {
    type Point = Vec<f64>;

    fn log_density(&self, x: &Vec<f64>) -> f64 {
        self.target.log_density(x)
    }

    fn initial_point(&self, rng: &mut StreamRng) -> Vec<f64> {
        let (lo, hi) = self.init_box;
        (0..self.target.dim()).map(|_| rng.random_range(lo..hi)).collect()
    }

    fn propagate(&self, level: usize, x: &mut Vec<f64>, log_pi: &mut f64, beta: f64, rng: &mut StreamRng) -> LevelStep {
        let outcome = rwm_step(x, log_pi, &self.target, self.proposals.factor(level), beta, rng);
        let direction = match (self.proposals.mode(), self.proposals.settings().ram_direction) {
            (AdaptationMode::Ram, RamDirection::Increment) => outcome.increment,
            (AdaptationMode::Ram, RamDirection::Noise) => outcome.noise,
            _ => Vec::new(),
        };
        LevelStep {
            acceptance_prob: outcome.acceptance_prob,
            accepted: outcome.accepted,
            direction,
        }
    }

    fn adapt(&mut self, states: &[Vec<f64>], steps: &[LevelStep], gains: ProposalGains, exec: Execution) {
        let settings = *self.proposals.settings();
        match self.proposals.mode() {
            AdaptationMode::Cov => {
                for_each_mut(exec, self.proposals.levels_mut(), |l, shape| {
                    shape.am_update(&states[l], gains.covariance, settings.eps_clamp);
                    shape.scale_update(steps[l].acceptance_prob, gains.scale, &settings);
                });
            }
            AdaptationMode::CovGlobal => {
                self.proposals.global_am_update(states, gains.covariance);
                for_each_mut(exec, self.proposals.levels_mut(), |l, shape| {
                    shape.scale_update(steps[l].acceptance_prob, gains.scale, &settings);
                });
            }
            AdaptationMode::Ram => {
                for_each_mut(exec, self.proposals.levels_mut(), |l, shape| {
                    shape.ram_update(&steps[l].direction, steps[l].acceptance_prob, gains.covariance, settings.alpha_star);
                });
            }
        }
    }

    fn log_scales(&self) -> Option<Vec<f64>> {
        match self.proposals.mode() {
            AdaptationMode::Ram => None,
            _ => Some(self.proposals.levels().iter().map(|s| s.log_scale()).collect()),
        }
    }

    fn coord_count(&self) -> usize {
        self.target.dim()
    }

    fn write_coords(&self, x: &Vec<f64>, out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// Single-pixel flip Metropolis on a binary image posterior. Proposals are
/// fixed, so only the temperatures adapt.
#[derive(Debug, Clone)]
pub struct FlipEngine {
    posterior: IsingPosterior,
}

impl FlipEngine {
    pub fn new(posterior: IsingPosterior) -> Self {
        Self { posterior }
    }

    pub fn posterior(&self) -> &IsingPosterior {
        &self.posterior
    }
}

impl LevelEngine for FlipEngine {
    type Point = IsingState;

    fn log_density(&self, x: &IsingState) -> f64 {
        self.posterior.value(x.counts())
    }

    /// Every level starts from the observed image.
    fn initial_point(&self, _rng: &mut StreamRng) -> IsingState {
        self.posterior
            .state(self.posterior.spec().observed.clone())
            .expect("observed image has the posterior's shape")
    }

    fn propagate(&self, _level: usize, x: &mut IsingState, log_pi: &mut f64, beta: f64, rng: &mut StreamRng) -> LevelStep {
        let outcome = flip_step(x, log_pi, &self.posterior, beta, rng);
        LevelStep {
            acceptance_prob: outcome.acceptance_prob,
            accepted: outcome.accepted,
            direction: Vec::new(),
        }
    }

    fn adapt(&mut self, _states: &[IsingState], _steps: &[LevelStep], _gains: ProposalGains, _exec: Execution) {}

    fn log_scales(&self) -> Option<Vec<f64>> {
        None
    }

    fn coord_count(&self) -> usize {
        self.posterior.site_count()
    }

    fn write_coords(&self, x: &IsingState, out: &mut [f64]) {
        for (o, &p) in out.iter_mut().zip(x.image().pixels()) {
            *o = p as f64;
        }
    }
}
