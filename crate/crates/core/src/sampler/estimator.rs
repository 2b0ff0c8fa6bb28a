use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A scalar functional `f(x⁽¹⁾)` of the level-1 coordinates.
#[derive(Clone)]
pub struct NamedFunction {
    pub name: String,
    pub f: ScalarFn,
}

impl NamedFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for NamedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NamedFunction").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Running sums of first and second moments per coordinate plus registered
/// functionals, over the post-burn-in iterations.
#[derive(Debug, Clone)]
pub struct EstimatorAccumulator {
    count: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    functions: Vec<NamedFunction>,
    function_sums: Vec<f64>,
}

impl EstimatorAccumulator {
    pub fn new(coords: usize, functions: Vec<NamedFunction>) -> Self {
        let k = functions.len();
        Self {
            count: 0,
            sum: vec![0.0; coords],
            sum_sq: vec![0.0; coords],
            functions,
            function_sums: vec![0.0; k],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.sum.len());
        self.count += 1;
        for ((s, q), &v) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(x) {
            *s += v;
            *q += v * v;
        }
        for (acc, nf) in self.function_sums.iter_mut().zip(&self.functions) {
            *acc += (nf.f)(x);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Vec<f64> {
        self.scaled(&self.sum)
    }

    pub fn sq_mean(&self) -> Vec<f64> {
        self.scaled(&self.sum_sq)
    }

    pub fn function_means(&self) -> Vec<(String, f64)> {
        self.functions
            .iter()
            .zip(self.scaled(&self.function_sums))
            .map(|(nf, m)| (nf.name.clone(), m))
            .collect()
    }

    fn scaled(&self, v: &[f64]) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        v.iter().map(|s| s / n).collect()
    }
}

/// Mean of a sequence of probabilities, kept as a sum and a count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct RateSum {
    pub sum: f64,
    pub count: u64,
}

impl RateSum {
    pub fn push(&mut self, p: f64) {
        self.sum += p;
        self.count += 1;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }
}
