use rand::Rng;
use serde::{Deserialize, Serialize};

use super::learner::{AgnosticConfig, AgnosticLearner};
use super::LabelCounts;
use crate::error::{invalid, Failure, Result};
use crate::hypothesis::{Domain, Hypothesis, HypothesisSpace};
use crate::oracle::CcqOracle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    /// Give up after budgets `2^1 .. 2^max_j`.
    pub max_j: u32,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig { max_j: 40 }
    }
}

/// Deviation bound on the empirical excess error of a sample of size `l`.
pub fn confidence_radius(d: usize, l: usize, j: u32, delta: f64, emp_err: f64) -> f64 {
    let l = l as f64;
    let log = (12.0 * l * (j as f64).powi(2) / delta).ln();
    8.0 * d as f64 / l * log + (emp_err * 16.0 * d as f64 / l * log).sqrt()
}

/// One budget level of the adaptive search.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStep {
    pub j: u32,
    pub n_j: u64,
    /// Smallest grid index whose refining finished, if any.
    pub chosen_i: Option<u32>,
    pub sample_size: usize,
    pub empirical_regret: f64,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptiveOutcome {
    pub hypothesis: Hypothesis,
    pub j_hat: u32,
    /// Noise level of the grid point that produced the hypothesis.
    pub eta_hat: f64,
    pub steps: Vec<AdaptiveStep>,
}

/// Agnostic learning without a noise bound: doubles a query budget and, for
/// each budget, tries the noise grid `2^(1-i)` until a sample certifies
/// excess error at most `eps`.
#[derive(Debug, Clone)]
pub struct AdaptiveAgnostic {
    space: HypothesisSpace,
    learner: AgnosticLearner,
    dim: usize,
    eps: f64,
    cfg: AdaptiveConfig,
}

impl AdaptiveAgnostic {
    pub fn new(
        space: &HypothesisSpace,
        dom: &Domain,
        eps: f64,
        agnostic: AgnosticConfig,
        cfg: AdaptiveConfig,
    ) -> Result<Self> {
        let learner = AgnosticLearner::new(space, dom, eps, agnostic)?;
        Self::with_learner(space.clone(), learner, eps, cfg)
    }

    pub fn with_learner(space: HypothesisSpace, learner: AgnosticLearner, eps: f64, cfg: AdaptiveConfig) -> Result<Self> {
        let dim = space
            .natarajan_dim()
            .ok_or_else(|| invalid("the space's Natarajan dimension must be known"))?;
        Ok(AdaptiveAgnostic {
            space,
            learner,
            dim,
            eps,
            cfg,
        })
    }

    /// Number of grid points, `max(1, floor(log2(1/eps)))`.
    pub fn grid_len(&self) -> u32 {
        ((1.0 / self.eps).log2().floor() as u32).max(1)
    }

    /// Stream length needed by the largest grid point.
    pub fn required_stream(&self, delta: f64) -> usize {
        self.learner.pool_size(1.0, delta / (8.0 * self.grid_len() as f64))
    }

    pub fn learn<R: Rng + ?Sized>(&self, oracle: &mut dyn CcqOracle, delta: f64, rng: &mut R) -> Result<AdaptiveOutcome> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("delta {delta} not in (0,1)")));
        }
        let grid = self.grid_len();
        let delta_i = delta / (8.0 * grid as f64);
        let need = self.required_stream(delta);
        if need > oracle.stream_len() {
            return Err(Failure::StreamExhausted {
                needed: need,
                available: oracle.stream_len(),
            }
            .into());
        }
        let n = self.space.domain_size();
        let k = self.space.k();
        let mut steps = Vec::new();
        for j in 1..=self.cfg.max_j {
            let n_j = 1u64 << j;
            let per_i = (n_j / grid as u64).max(1);
            let mut chosen = None;
            for i in 1..=grid {
                let eta_i = 2f64.powi(1 - i as i32);
                let out = self.learner.run(oracle, eta_i, delta_i, Some(per_i), rng)?;
                if out.complete {
                    chosen = Some((i, eta_i, out));
                    break;
                }
            }
            let Some((i, eta_i, out)) = chosen else {
                steps.push(AdaptiveStep {
                    j,
                    n_j,
                    chosen_i: None,
                    sample_size: 0,
                    empirical_regret: f64::NAN,
                    radius: f64::INFINITY,
                });
                continue;
            };
            let counts = LabelCounts::from_sample(&out.sample, |p| oracle.point(p), n, k);
            let emp = counts.error(&out.hypothesis);
            let (_, best) = counts.argmin_error(self.space.hypotheses());
            let radius = confidence_radius(self.dim, out.sample.len(), j, delta, emp);
            let regret = emp - best;
            log::debug!("adaptive j={j} i={i} |L|={} regret={regret:.4} radius={radius:.4}", out.sample.len());
            steps.push(AdaptiveStep {
                j,
                n_j,
                chosen_i: Some(i),
                sample_size: out.sample.len(),
                empirical_regret: regret,
                radius,
            });
            if regret + radius <= self.eps {
                return Ok(AdaptiveOutcome {
                    hypothesis: out.hypothesis,
                    j_hat: j,
                    eta_hat: eta_i,
                    steps,
                });
            }
        }
        Err(Failure::NoCompletion(format!("no budget up to 2^{} certified the hypothesis", self.cfg.max_j)).into())
    }
}
