use crate::error::{Error, Result};
use crate::kernels::swap_acceptance;

/// Largest product space [`exact_swap_invariance`] will assemble.
pub const MAX_PRODUCT_STATES: usize = 100_000;

/// The swap kernel on `{0, …, K−1}^L` for a finite target `π` and a ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernelCheck {
    /// Unnormalized target weights `π(s) > 0`.
    pub weights: Vec<f64>,
    pub betas: Vec<f64>,
}

impl FiniteKernelCheck {
    pub fn new(weights: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::config("weights", "need positive finite weights"));
        }
        if betas.len() < 2 || betas.windows(2).any(|w| !(w[1] < w[0])) || betas[betas.len() - 1] <= 0.0 {
            return Err(Error::config("betas", "need at least two strictly decreasing positive betas"));
        }
        let size = Self::size_of(weights.len(), betas.len());
        if size > MAX_PRODUCT_STATES {
            return Err(Error::StateSpaceTooLarge { size, limit: MAX_PRODUCT_STATES });
        }
        Ok(Self { weights, betas })
    }

    fn size_of(k: usize, levels: usize) -> usize {
        (0..levels).try_fold(1usize, |acc, _| acc.checked_mul(k)).unwrap_or(usize::MAX)
    }

    pub fn levels(&self) -> usize {
        self.betas.len()
    }

    /// Number of product states `K^L`.
    pub fn size(&self) -> usize {
        Self::size_of(self.weights.len(), self.levels())
    }

    fn decode(&self, mut index: usize, out: &mut [usize]) {
        let k = self.weights.len();
        for slot in out.iter_mut() {
            *slot = index % k;
            index /= k;
        }
    }

    fn encode(&self, states: &[usize]) -> usize {
        let k = self.weights.len();
        states.iter().rev().fold(0, |acc, &s| acc * k + s)
    }

    /// Normalized product density `Π_ℓ π(s_ℓ)^{β_ℓ}` over all product states.
    pub fn product_density(&self) -> Vec<f64> {
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let mut states = vec![0; self.levels()];
        let logs: Vec<f64> = (0..self.size())
            .map(|i| {
                self.decode(i, &mut states);
                states.iter().zip(&self.betas).map(|(&s, b)| b * log_w[s]).sum()
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let unnorm: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = unnorm.iter().sum();
        unnorm.into_iter().map(|p| p / z).collect()
    }

    /// Sparse rows of the swap kernel: pick a pair uniformly, then accept.
    /// Each row lists `(column, probability)`; the diagonal entry comes first.
    pub fn transition_rows(&self) -> Vec<Vec<(usize, f64)>> {
        let pairs = self.levels() - 1;
        let log_w: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let mut states = vec![0; self.levels()];
        (0..self.size())
            .map(|i| {
                self.decode(i, &mut states);
                let mut row = vec![(i, 0.0)];
                for j in 0..pairs {
                    let p = swap_acceptance(log_w[states[j]], log_w[states[j + 1]], self.betas[j], self.betas[j + 1]);
                    let pick = 1.0 / pairs as f64;
                    states.swap(j, j + 1);
                    let target = self.encode(&states);
                    states.swap(j, j + 1);
                    if target == i {
                        row[0].1 += pick;
                    } else {
                        row[0].1 += pick * (1.0 - p);
                        row.push((target, pick * p));
                    }
                }
                row
            })
            .collect()
    }
}

/// `max_t |(π_β S)(t) − π_β(t)|` for the exact swap kernel `S`.
pub fn exact_swap_invariance(check: &FiniteKernelCheck) -> f64 {
    let pi = check.product_density();
    let mut pushed = vec![0.0; pi.len()];
    for (i, row) in check.transition_rows().iter().enumerate() {
        for &(j, p) in row {
            pushed[j] += pi[i] * p;
        }
    }
    pushed.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        let check = FiniteKernelCheck::new(vec![0.5, 0.3, 0.2], vec![1.0, 0.6, 0.2]).unwrap();
        for row in check.transition_rows() {
            let s: f64 = row.iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|e| (0.0..=1.0).contains(&e.1)));
        }
    }

    #[test]
    fn three_point_space() {
        let check = FiniteKernelCheck::new(vec![0.5, 0.3, 0.2], vec![1.0, 0.4]).unwrap();
        assert!(exact_swap_invariance(&check) < 1e-14);
        let check = FiniteKernelCheck::new(vec![0.5, 0.3, 0.2], vec![1.0, 0.4, 0.1]).unwrap();
        assert!(exact_swap_invariance(&check) < 1e-14);
    }

    #[test]
    fn uniform_target_is_exactly_invariant() {
        let check = FiniteKernelCheck::new(vec![1.0; 4], vec![1.0, 0.5]).unwrap();
        assert_eq!(exact_swap_invariance(&check), 0.0);
    }

    #[test]
    fn size_limit() {
        let err = FiniteKernelCheck::new(vec![1.0; 10], vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5]).unwrap_err();
        assert!(matches!(err, Error::StateSpaceTooLarge { size: 1_000_000, .. }));
        assert!(FiniteKernelCheck::new(vec![1.0; 10], vec![1.0, 0.9, 0.8, 0.7, 0.6]).is_ok());
    }
}
