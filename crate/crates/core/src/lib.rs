//! Adaptive parallel tempering (replica exchange) Markov chain Monte Carlo.
//!
//! The sampler runs `L` tempered random-walk Metropolis chains targeting
//! `π^β` on a ladder `1 = β₁ > β₂ > … > β_L > 0`, proposes one swap between a
//! uniformly chosen pair of adjacent levels per iteration, and adapts
//!
//! * the inverse temperatures, through the unconstrained parameters `ρ` with
//!   `β_{ℓ+1} = β_ℓ · exp(−exp(ρ_ℓ))`, by stochastic approximation towards a
//!   mean swap acceptance probability `α*`;
//! * the random-walk proposals, by one of three rules: per-level adaptive
//!   Metropolis covariance with a scale factor ([`AdaptationMode::Cov`]), a
//!   covariance shared by all levels ([`AdaptationMode::CovGlobal`]), or the
//!   robust adaptive Metropolis factor update ([`AdaptationMode::Ram`]).
//!
//! Binary image posteriors (Ising prior, single-pixel flip proposals) are
//! supported with temperature adaptation only.
//!
//! The [`oracle`] module computes independent ground truth: the stationary
//! mean swap acceptance `h̃(u, v)` by quadrature, the temperature fixed point
//! it implies, exact swap-kernel invariance on finite spaces, and detailed
//! balance audits.
//!
//! ```
//! use aptemper::config::{SamplerConfig, TargetSpec};
//! use aptemper::sampler::run;
//!
//! let mut config = SamplerConfig::new(TargetSpec::Gaussian { dim: 1 });
//! config.levels = 3;
//! config.iterations = 2000;
//! config.burn_in = 1000;
//! let output = run(&config).unwrap();
//! assert_eq!(output.summary.count, 1000);
//! assert!(output.summary.final_betas[1] < 1.0);
//! ```

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod config;
pub mod error;
pub mod io;
pub mod kernels;
pub mod ladder;
pub mod linalg;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod sampler;
pub mod target;

pub use adaptation::AdaptationMode;
pub use error::{Error, Result};
