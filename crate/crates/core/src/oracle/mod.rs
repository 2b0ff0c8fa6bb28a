//! Independent numerical ground truth for the sampler.
//!
//! * [`h_tilde`]: the stationary mean swap acceptance between two tempering
//!   exponents of a one-dimensional target, by nested Gauss–Kronrod
//!   quadrature (with a Monte Carlo counterpart, [`h_tilde_mc`]);
//! * [`fixed_point_rho`]: the temperature parameters at which every pair
//!   accepts swaps at rate `α*`;
//! * [`exact_swap_invariance`]: the swap kernel assembled exactly on a finite
//!   product space;
//! * [`detailed_balance_audit`]: pointwise reversibility of the tempered
//!   random-walk kernel.

mod audit;
mod finite;
mod mean_field;
pub mod quadrature;

pub use audit::{detailed_balance_audit, detailed_balance_violation};
pub use finite::{exact_swap_invariance, FiniteKernelCheck, MAX_PRODUCT_STATES};
pub use mean_field::{
    fixed_point_rho, h_tilde, h_tilde_mc, h_tilde_with, normalizing_constant, pair_acceptance, BimodalTarget,
    FixedPoint, LaplaceTarget, OracleTarget, OracleTargetKind, StandardNormalTarget,
};
