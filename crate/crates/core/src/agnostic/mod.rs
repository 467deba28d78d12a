//! Agnostic learning with class-conditional queries: the Find-Mistake
//! subroutine, generalized halving, refining, the known-bound learner and
//! its noise-adaptive wrapper.

mod adaptive;
mod find_mistake;
mod halving;
mod learner;
mod refining;

pub use adaptive::{confidence_radius, AdaptiveAgnostic, AdaptiveConfig, AdaptiveOutcome, AdaptiveStep};
pub use find_mistake::find_mistake;
pub use halving::{generalized_halving, set_size, HalvingConfig, HalvingOutcome, HalvingRound};
pub(crate) use halving::draws as halving_draws;
pub use learner::{agnostic_learn, pool_size, AgnosticConfig, AgnosticLearner, AgnosticOutcome, REGIME_LIMIT};
pub use refining::{chunked_refining, refining, RefineOutcome};

use crate::hypothesis::{Hypothesis, Label, LabeledSample};

/// Per-(point, label) counts of a labeled sample, for fast empirical errors.
#[derive(Debug, Clone)]
pub struct LabelCounts {
    k: usize,
    counts: Vec<u32>,
    support: Vec<usize>,
    total: usize,
}

impl LabelCounts {
    pub fn new(n: usize, k: Label) -> Self {
        LabelCounts {
            k: k as usize,
            counts: vec![0; n * k as usize],
            support: Vec::new(),
            total: 0,
        }
    }

    pub fn from_sample<F: Fn(usize) -> usize>(sample: &LabeledSample, resolve: F, n: usize, k: Label) -> Self {
        let mut c = Self::new(n, k);
        for &(p, y) in sample.iter() {
            c.add(resolve(p), y);
        }
        c
    }

    pub fn add(&mut self, x: usize, y: Label) {
        let row = &mut self.counts[x * self.k..(x + 1) * self.k];
        if row.iter().all(|c| *c == 0) {
            self.support.push(x);
        }
        row[y as usize - 1] += 1;
        self.total += 1;
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn get(&self, x: usize, y: Label) -> u32 {
        self.counts[x * self.k + y as usize - 1]
    }

    /// Number of counted examples `h` gets wrong.
    pub fn mistakes(&self, h: &Hypothesis) -> usize {
        let right: usize = self
            .support
            .iter()
            .map(|&x| self.counts[x * self.k + h.label(x) as usize - 1] as usize)
            .sum();
        self.total - right
    }

    pub fn error(&self, h: &Hypothesis) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.mistakes(h) as f64 / self.total as f64
    }

    /// Index and error of the first hypothesis of minimum empirical error.
    pub fn argmin_error(&self, hyps: &[Hypothesis]) -> (usize, f64) {
        let mut best = (0, usize::MAX);
        for (i, h) in hyps.iter().enumerate() {
            let m = self.mistakes(h);
            if m < best.1 {
                best = (i, m);
            }
        }
        (best.0, best.1 as f64 / self.total.max(1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_takes_first_minimizer() {
        // two candidates with 10% and 12% empirical error
        let mut c = LabelCounts::new(2, 2);
        for _ in 0..88 {
            c.add(0, 1);
        }
        for _ in 0..2 {
            c.add(1, 1);
        }
        for _ in 0..10 {
            c.add(1, 2);
        }
        let a = Hypothesis::new(vec![1, 1]);
        let b = Hypothesis::new(vec![2, 2]);
        let a2 = Hypothesis::new(vec![1, 1]);
        assert!((c.error(&a) - 0.10).abs() < 1e-12);
        let hb = Hypothesis::new(vec![1, 2]);
        assert!((c.error(&hb) - 0.02).abs() < 1e-12);
        let (i, e) = c.argmin_error(&[b, a.clone(), a2]);
        assert_eq!(i, 1);
        assert!((e - 0.10).abs() < 1e-12);
    }
}
