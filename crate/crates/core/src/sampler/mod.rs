//! The adaptive parallel tempering iteration, run drivers and replications.
//!
//! One iteration `n ≥ 1` is, in order:
//!
//! 1. a swap between one uniformly chosen adjacent pair under `β_{n−1}`;
//! 2. one kernel step at every level under `(Σ_{n−1}, β_{n−1})`;
//! 3. the temperature update from the swap probabilities at the new state;
//! 4. the covariance/mean update (per level, pooled, or none);
//! 5. the scale update from the realized acceptance probabilities, or the
//!    RAM factor update.

mod chain;
mod engine;
mod estimator;
mod record;

pub use chain::ChainState;
pub use engine::{FlipEngine, LevelEngine, LevelStep, ProposalGains, RwmEngine};
pub use estimator::{EstimatorAccumulator, NamedFunction};
pub use record::IterationRecord;

use serde::{Deserialize, Serialize};

use crate::adaptation::{CovAdaptState, Gain, StepSizeSchedule, TempAdaptState};
use crate::config::SamplerConfig;
use crate::error::{Error, Result};
use crate::kernels::swap_step;
use crate::ladder::RhoVector;
use crate::parallel::{map_indices, map_zip_mut, Execution};
use crate::rng::{level_slot, replication_seed, stream, INIT_ITERATION, SWAP_SLOT};
use crate::target::{ContinuousModel, ContinuousTarget, TargetDensity};
use estimator::RateSum;

/// An adaptive parallel tempering sampler over a [`LevelEngine`].
#[derive(Debug, Clone)]
pub struct Sampler<E: LevelEngine> {
    engine: E,
    chain: ChainState<E::Point>,
    temps: TempAdaptState,
    schedule: StepSizeSchedule,
    seed: u64,
    iteration: u64,
    freeze_after: Option<u64>,
    exec: Execution,
}

impl<E: LevelEngine> Sampler<E> {
    /// Draws the initial states from the iteration-0 streams.
    pub fn new(engine: E, config: &SamplerConfig) -> Result<Self> {
        let levels = config.levels;
        let states: Vec<E::Point> = (0..levels)
            .map(|l| engine.initial_point(&mut stream(config.seed, INIT_ITERATION, level_slot(l))))
            .collect();
        let log_pi: Vec<f64> = states.iter().map(|x| engine.log_density(x)).collect();
        if let Some(level) = log_pi.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInitialState { level });
        }
        let rho = RhoVector::constant(levels, config.rho_init, config.rho_bounds);
        let mut temps = TempAdaptState::new(rho, config.proposal.alpha_star);
        if config.geometric {
            temps = temps.geometric();
        }
        Ok(Self {
            schedule: config.resolved_schedule(engine.dim()),
            engine,
            chain: ChainState::new(states, log_pi),
            temps,
            seed: config.seed,
            iteration: 0,
            freeze_after: config.freeze_after_burn_in.then_some(config.burn_in),
            exec: config.level_execution,
        })
    }

    pub fn engine(&self) -> &E {
        &self.engine
    }

    pub fn chain(&self) -> &ChainState<E::Point> {
        &self.chain
    }

    pub fn temperatures(&self) -> &TempAdaptState {
        &self.temps
    }

    /// Number of completed iterations.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    fn gain(&self, n: u64, which: Gain) -> f64 {
        match self.freeze_after {
            Some(b) if n > b => 0.0,
            _ => self.schedule.gamma(n, which),
        }
    }

    /// Advances one full iteration.
    pub fn step(&mut self) -> IterationRecord {
        let n = self.iteration + 1;
        let seed = self.seed;
        let ladder = self.temps.ladder().clone();

        let swap = swap_step(&mut self.chain, &ladder, &mut stream(seed, n, SWAP_SLOT));

        let betas = ladder.betas();
        let engine = &self.engine;
        let (states, log_pi) = self.chain.parts_mut();
        let steps = map_zip_mut(self.exec, states, log_pi, |l, x, lp| {
            engine.propagate(l, x, lp, betas[l], &mut stream(seed, n, level_slot(l)))
        });

        let swap_probs = self.temps.update(self.chain.log_pi(), self.gain(n, Gain::Temperature));

        let gains = ProposalGains {
            covariance: self.gain(n, Gain::Covariance),
            scale: self.gain(n, Gain::Scale),
        };
        self.engine.adapt(self.chain.states(), &steps, gains, self.exec);
        self.iteration = n;

        IterationRecord {
            iteration: n,
            betas: betas.to_vec(),
            rho: self.temps.rho().values().to_vec(),
            swap,
            swap_probs,
            accept_prob: steps.iter().map(|s| s.acceptance_prob).collect(),
            accepted: steps.iter().map(|s| s.accepted).collect(),
            log_scales: self.engine.log_scales(),
            x1: None,
        }
    }

    /// Level-1 coordinates of the current state.
    pub fn level1_coords(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.engine.coord_count()];
        self.engine.write_coords(self.chain.state(0), &mut out);
        out
    }

    /// Largest `|cached log π − fresh log π|` over levels.
    pub fn cache_discrepancy(&self) -> f64 {
        self.chain
            .states()
            .iter()
            .zip(self.chain.log_pi())
            .map(|(x, &c)| {
                let fresh = self.engine.log_density(x);
                if fresh == c { 0.0 } else { (fresh - c).abs() }
            })
            .fold(0.0, f64::max)
    }
}

/// Estimates and diagnostics of one run. Averages cover the iterations after
/// burn-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub count: u64,
    /// Level-1 `E[X_i]`.
    pub coord_mean: Vec<f64>,
    /// Level-1 `E[X_i²]`.
    pub coord_sq_mean: Vec<f64>,
    pub functions: Vec<(String, f64)>,
    pub final_betas: Vec<f64>,
    pub final_rho: Vec<f64>,
    /// Mean swap acceptance probability of each adjacent pair, evaluated for
    /// every pair at every iteration.
    pub swap_accept_prob: Vec<f64>,
    /// Swap proposals and acceptances per pair.
    pub swap_attempts: Vec<u64>,
    pub swap_accepts: Vec<u64>,
    /// Mean within-level acceptance probability per level.
    pub rwm_accept_prob: Vec<f64>,
    pub final_log_scales: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: Vec<IterationRecord>,
}

/// Runs the configured sampler and keeps the thinned trace in memory.
pub fn run(config: &SamplerConfig) -> Result<RunOutput> {
    let mut trace = Vec::new();
    let summary = run_with(config, &[], |r| {
        trace.push(r.clone());
        Ok(())
    })?;
    Ok(RunOutput { summary, trace })
}

/// Runs the configured sampler, handing every `thin`-th record to `sink` and
/// accumulating `functions` of the level-1 state.
pub fn run_with<F>(config: &SamplerConfig, functions: &[NamedFunction], sink: F) -> Result<RunSummary>
where
    F: FnMut(&IterationRecord) -> Result<()>,
{
    config.validate()?;
    match config.target.build()? {
        TargetDensity::Continuous(model) => {
            let dim = model.dim();
            let proposals = CovAdaptState::new(config.adaptation, dim, config.levels, config.proposal, config.log_scale_init);
            let init_box = config.init_box.unwrap_or_else(|| default_init_box(&model));
            drive(RwmEngine::new(model, proposals, init_box), config, functions, sink)
        }
        TargetDensity::Lattice(posterior) => drive(FlipEngine::new(posterior), config, functions, sink),
    }
}

/// Default box for uniform initial states: the bounding box of the mixture
/// means, `[−3σ, 3σ]` around a Gaussian mean, `[−1, 1]` otherwise.
pub fn default_init_box(model: &ContinuousModel) -> (f64, f64) {
    match model {
        ContinuousModel::Mixture(m) => {
            let coords = m.spec().means.iter().flatten();
            let lo = coords.clone().copied().fold(f64::INFINITY, f64::min);
            let hi = coords.copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo { (lo, hi) } else { (lo - 1.0, lo + 1.0) }
        }
        ContinuousModel::Gaussian(g) => {
            let s = 3.0 * g.variance().sqrt();
            (g.mean() - s, g.mean() + s)
        }
        ContinuousModel::Flat(_) => (-1.0, 1.0),
    }
}

fn drive<E, F>(engine: E, config: &SamplerConfig, functions: &[NamedFunction], mut sink: F) -> Result<RunSummary>
where
    E: LevelEngine,
    F: FnMut(&IterationRecord) -> Result<()>,
{
    let mut sampler = Sampler::new(engine, config)?;
    let levels = config.levels;
    let pairs = levels.saturating_sub(1);
    let coords = sampler.engine().coord_count();
    let mut estimates = EstimatorAccumulator::new(coords, functions.to_vec());
    let mut swap_rates = vec![RateSum::default(); pairs];
    let mut swap_attempts = vec![0u64; pairs];
    let mut swap_accepts = vec![0u64; pairs];
    let mut level_rates = vec![RateSum::default(); levels];
    let mut x1 = vec![0.0; coords];

    for n in 1..=config.iterations {
        let mut record = sampler.step();
        let sampling = n > config.burn_in;
        if sampling {
            sampler.engine().write_coords(sampler.chain().state(0), &mut x1);
            estimates.push(&x1);
            for (acc, &p) in swap_rates.iter_mut().zip(&record.swap_probs) {
                acc.push(p);
            }
            for (acc, &p) in level_rates.iter_mut().zip(&record.accept_prob) {
                acc.push(p);
            }
            if let Some(s) = record.swap {
                swap_attempts[s.pair] += 1;
                swap_accepts[s.pair] += s.accepted as u64;
            }
        }
        if n % config.thin == 0 {
            if config.record_state {
                if !sampling {
                    sampler.engine().write_coords(sampler.chain().state(0), &mut x1);
                }
                record.x1 = Some(x1.clone());
            }
            sink(&record)?;
        }
    }

    Ok(RunSummary {
        seed: config.seed,
        count: estimates.count(),
        coord_mean: estimates.mean(),
        coord_sq_mean: estimates.sq_mean(),
        functions: estimates.function_means(),
        final_betas: sampler.temperatures().ladder().betas().to_vec(),
        final_rho: sampler.temperatures().rho().values().to_vec(),
        swap_accept_prob: swap_rates.iter().map(RateSum::mean).collect(),
        swap_attempts,
        swap_accepts,
        rwm_accept_prob: level_rates.iter().map(RateSum::mean).collect(),
        final_log_scales: sampler.engine().log_scales(),
    })
}

/// One row of a replication table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub estimator: String,
    /// Mean over replications (NaN for vector-valued rows).
    pub mean: f64,
    /// Standard deviation over replications with divisor `R − 1`; 0 when
    /// `R = 1`, NaN for vector-valued rows.
    pub std: f64,
    /// Root mean square error against the true value, if known.
    pub rmse: Option<f64>,
}

/// Estimates aggregated over independent replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationTable {
    pub replications: usize,
    /// Set when a single replication makes the standard deviations meaningless.
    pub std_undefined: bool,
    pub rows: Vec<EstimateRow>,
    pub summaries: Vec<RunSummary>,
}

impl ReplicationTable {
    pub fn row(&self, estimator: &str) -> Option<&EstimateRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }
}

/// Runs `replications` independent copies of `config` with seeds
/// `seed, seed + 1, …` and tabulates mean, standard deviation and RMSE.
///
/// For continuous targets rows `E[X<i>]` and `E[X<i>^2]` are reported per
/// coordinate, and, when the true moments are known, vector rows `E[X]` and
/// `E[X^2]` whose RMSE is `sqrt(mean_r ‖est_r − truth‖²)`. Rows `swap[<j>]`
/// hold the mean swap acceptance of each pair.
pub fn replicate(config: &SamplerConfig, replications: usize, exec: Execution) -> Result<ReplicationTable> {
    if replications == 0 {
        return Err(Error::config("replications", "need at least one replication"));
    }
    config.validate()?;
    let truth = config.target.true_moments()?;
    let continuous = matches!(config.target.build()?, TargetDensity::Continuous(_));
    let results = map_indices(exec, replications, |r| {
        let mut c = config.clone();
        c.seed = replication_seed(config.seed, r);
        run_with(&c, &[], |_| Ok(()))
    });
    let summaries = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    if continuous {
        let d = summaries[0].coord_mean.len();
        let pick = |sq: bool, i: usize| -> Vec<f64> {
            summaries
                .iter()
                .map(|s| if sq { s.coord_sq_mean[i] } else { s.coord_mean[i] })
                .collect()
        };
        for (sq, label) in [(false, ""), (true, "^2")] {
            for i in 0..d {
                let values = pick(sq, i);
                let t = truth.as_ref().map(|(m, m2)| if sq { m2[i] } else { m[i] });
                rows.push(scalar_row(format!("E[X{}{label}]", i + 1), &values, t));
            }
        }
        if let Some((m, m2)) = &truth {
            for (sq, label, t) in [(false, "E[X]", m), (true, "E[X^2]", m2)] {
                let mse = summaries
                    .iter()
                    .map(|s| {
                        let est = if sq { &s.coord_sq_mean } else { &s.coord_mean };
                        est.iter().zip(t).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                    })
                    .sum::<f64>()
                    / replications as f64;
                rows.push(EstimateRow {
                    estimator: label.to_string(),
                    mean: f64::NAN,
                    std: f64::NAN,
                    rmse: Some(mse.sqrt()),
                });
            }
        }
    }
    for j in 0..config.levels.saturating_sub(1) {
        let values: Vec<f64> = summaries.iter().map(|s| s.swap_accept_prob[j]).collect();
        rows.push(scalar_row(format!("swap[{}]", j + 1), &values, None));
    }
    Ok(ReplicationTable {
        replications,
        std_undefined: replications == 1,
        rows,
        summaries,
    })
}

fn scalar_row(estimator: String, values: &[f64], truth: Option<f64>) -> EstimateRow {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
    } else {
        0.0
    };
    let rmse = truth.map(|t| (values.iter().map(|v| (v - t).powi(2)).sum::<f64>() / r).sqrt());
    EstimateRow {
        estimator,
        mean,
        std,
        rmse,
    }
}
