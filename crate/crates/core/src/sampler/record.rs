use serde::{Deserialize, Serialize};

use crate::kernels::SwapOutcome;

/// One row of the trace.
///
/// `betas` are the inverse temperatures the kernels used at this iteration,
/// `rho` the temperature parameters after its update. `swap_probs[j]` is the
/// swap acceptance probability of pair `j` at the post-move state (the value
/// driving the temperature update); `accept_prob[ℓ]` is the realized
/// within-level acceptance probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub betas: Vec<f64>,
    pub rho: Vec<f64>,
    pub swap: Option<SwapOutcome>,
    pub swap_probs: Vec<f64>,
    pub accept_prob: Vec<f64>,
    pub accepted: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<Vec<f64>>,
}
