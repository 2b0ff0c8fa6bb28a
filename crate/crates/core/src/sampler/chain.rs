/// The product-space state `X = (X₁, …, X_L)` with cached `log π(X_ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState<P> {
    states: Vec<P>,
    log_pi: Vec<f64>,
}

impl<P> ChainState<P> {
    pub fn new(states: Vec<P>, log_pi: Vec<f64>) -> Self {
        assert_eq!(states.len(), log_pi.len(), "one cached log density per level");
        Self { states, log_pi }
    }

    pub fn levels(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[P] {
        &self.states
    }

    pub fn log_pi(&self) -> &[f64] {
        &self.log_pi
    }

    pub fn state(&self, level: usize) -> &P {
        &self.states[level]
    }

    /// Exchanges two levels together with their cached log densities.
    pub fn swap_levels(&mut self, a: usize, b: usize) {
        self.states.swap(a, b);
        self.log_pi.swap(a, b);
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [P], &mut [f64]) {
        (&mut self.states, &mut self.log_pi)
    }
}
