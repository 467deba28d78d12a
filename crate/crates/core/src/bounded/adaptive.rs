use rand::Rng;

use super::driver::{BoundedDriver, BoundedOutcome};
use super::BatchLearner;
use crate::error::{Error, Failure, Result};
use crate::oracle::CcqOracle;

#[derive(Debug, Clone)]
pub struct AdaptiveAlphaOutcome {
    pub outcome: BoundedOutcome,
    /// Noise bound of the run that completed.
    pub alpha: f64,
    /// Every bound tried, with the failure that ended it.
    pub attempts: Vec<(f64, Option<String>)>,
}

/// Runs the budgeted driver with `alpha_i = 2^(i-1) eps` for increasing `i`
/// and returns the first run that completes.
///
/// `make_learner` builds a fresh batch learner for a given noise bound.
pub fn adaptive_alpha<R, F>(
    driver: &BoundedDriver,
    oracle: &mut dyn CcqOracle,
    mut make_learner: F,
    delta: f64,
    rng: &mut R,
) -> Result<AdaptiveAlphaOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(f64) -> Result<Box<dyn BatchLearner>>,
{
    let eps = driver.eps();
    let grid = ((1.0 / eps).log2().floor() as i32).max(1);
    let mut attempts = Vec::new();
    for i in 1..=grid {
        let alpha = 2f64.powi(i - 1) * eps;
        if alpha >= 0.5 {
            break;
        }
        let mut learner = make_learner(alpha)?;
        match driver.run_budgeted(oracle, learner.as_mut(), alpha, delta, rng) {
            Ok(outcome) => {
                attempts.push((alpha, None));
                return Ok(AdaptiveAlphaOutcome {
                    outcome,
                    alpha,
                    attempts,
                });
            }
            Err(Error::Failure(f)) => {
                log::debug!("noise guess {alpha} failed: {f}");
                attempts.push((alpha, Some(f.to_string())));
            }
            Err(e) => return Err(e),
        }
    }
    Err(Failure::NoCompletion(format!("all {} noise guesses failed", attempts.len())).into())
}
