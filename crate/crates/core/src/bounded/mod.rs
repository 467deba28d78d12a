//! Bounded-noise learning: a driver that labels the batches of a
//! region-based active learner with class-conditional queries, a
//! disagreement-region batch learner, and a wrapper that adapts to the
//! unknown noise bound.

mod adaptive;
mod disagreement;
mod driver;

pub use adaptive::{adaptive_alpha, AdaptiveAlphaOutcome};
pub use disagreement::{DisagreementConfig, DisagreementLearner};
pub use driver::{bounded_noise_learn, BoundedConfig, BoundedDriver, BoundedOutcome, RoundRecord};

use crate::error::Result;
use crate::hypothesis::{Hypothesis, Label};

/// What a batch learner asks for next.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRequest {
    /// Domain points the next batch must come from.
    pub region: Vec<bool>,
    /// Number of labeled examples wanted.
    pub batch_size: usize,
    /// `false` once the learner has halted.
    pub proceed: bool,
    /// Current output hypothesis.
    pub hypothesis: Hypothesis,
}

/// A learner that works in rounds, each consuming a batch of labeled
/// examples drawn from the conditional distribution on a region.
pub trait BatchLearner {
    fn start(&mut self) -> Result<BatchRequest>;

    /// Feeds one batch of `(domain point, label)` pairs.
    fn update(&mut self, batch: &[(usize, Label)]) -> Result<BatchRequest>;
}
