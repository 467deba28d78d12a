use rand::Rng;
use serde::{Deserialize, Serialize};

use super::halving::{generalized_halving, HalvingConfig, HalvingRound};
use super::refining::{chunked_refining, refining, RefineOutcome};
use super::LabelCounts;
use crate::error::{invalid, Failure, Result};
use crate::hypothesis::{epsilon_cover, Domain, Hypothesis, HypothesisSpace, LabeledSample};
use crate::oracle::CcqOracle;

/// Rate above which the analysed guarantee no longer applies.
pub const REGIME_LIMIT: f64 = 1.0 / 32.0;

/// Constants of the agnostic learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgnosticConfig {
    /// Multiplier in the pool size `u`.
    pub c_u: f64,
    /// Multiplier in the number of draws per halving loop.
    pub c_halving: f64,
    /// Lower bound on draws per halving loop.
    pub min_draws: usize,
    /// Cover radius as a multiple of `eps`.
    pub cover_factor: f64,
    /// Refine in chunks of `ceil(1 / (beta + eps))` points.
    pub chunked: bool,
    /// Total budget, split evenly between halving (draw units) and refining (calls).
    pub budget: Option<u64>,
}

impl Default for AgnosticConfig {
    fn default() -> Self {
        AgnosticConfig {
            c_u: 32.0,
            c_halving: 48.0,
            min_draws: 24,
            cover_factor: 1.0,
            chunked: false,
            budget: None,
        }
    }
}

/// `ceil(c_u * d * rate / eps^2 * ln(k / (eps * delta)))`.
pub fn pool_size(c_u: f64, d: usize, rate: f64, eps: f64, k: u16, delta: f64) -> usize {
    (c_u * d.max(1) as f64 * rate / (eps * eps) * (k as f64 / (eps * delta)).ln()).ceil() as usize
}

#[derive(Debug, Clone)]
pub struct AgnosticOutcome {
    pub hypothesis: Hypothesis,
    /// Labels gathered by refining.
    pub sample: LabeledSample,
    pub complete: bool,
    pub u: usize,
    pub s: usize,
    pub n_draws: usize,
    pub cover_size: usize,
    pub survivors: usize,
    pub halving_rounds: Vec<HalvingRound>,
    pub halving_calls: u64,
    pub refine_calls: u64,
    /// Set when `beta + eps` exceeds the analysed regime.
    pub regime_violation: bool,
}

/// The known-noise-bound agnostic learner, with its cover built once.
#[derive(Debug, Clone)]
pub struct AgnosticLearner {
    cover: HypothesisSpace,
    dim: usize,
    eps: f64,
    cfg: AgnosticConfig,
}

impl AgnosticLearner {
    pub fn new(space: &HypothesisSpace, dom: &Domain, eps: f64, cfg: AgnosticConfig) -> Result<Self> {
        check_eps(eps)?;
        let radius = (cfg.cover_factor * eps).min(1.0);
        let cover = epsilon_cover(space, dom, radius)?;
        Self::with_cover(cover, eps, cfg)
    }

    pub fn with_cover(cover: HypothesisSpace, eps: f64, cfg: AgnosticConfig) -> Result<Self> {
        check_eps(eps)?;
        let dim = cover
            .natarajan_dim()
            .ok_or_else(|| invalid("the space's Natarajan dimension must be known"))?;
        Ok(AgnosticLearner { cover, dim, eps, cfg })
    }

    pub fn cover(&self) -> &HypothesisSpace {
        &self.cover
    }

    pub fn config(&self) -> &AgnosticConfig {
        &self.cfg
    }

    pub fn pool_size(&self, beta: f64, delta: f64) -> usize {
        pool_size(self.cfg.c_u, self.dim, beta + self.eps, self.eps, self.cover.k(), delta)
    }

    /// Runs the learner with noise bound `beta`; an unfinished refining pass is a failure.
    pub fn learn<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        beta: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<AgnosticOutcome> {
        let out = self.run(oracle, beta, delta, self.cfg.budget, rng)?;
        if !out.complete {
            return Err(Failure::Incomplete {
                labeled: out.sample.len(),
                required: out.u,
            }
            .into());
        }
        Ok(out)
    }

    /// Runs the learner, reporting an unfinished refining pass through `complete`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        beta: f64,
        delta: f64,
        budget: Option<u64>,
        rng: &mut R,
    ) -> Result<AgnosticOutcome> {
        if !(0.0..=1.0).contains(&beta) || !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("need beta in [0,1] and delta in (0,1), got {beta}, {delta}")));
        }
        let rate = beta + self.eps;
        let regime_violation = rate > REGIME_LIMIT;
        if regime_violation {
            log::warn!("beta + eps = {rate} exceeds 1/32; the accuracy guarantee does not apply");
        }
        let u = self.pool_size(beta, delta);
        if u > oracle.stream_len() {
            return Err(Failure::StreamExhausted {
                needed: u,
                available: oracle.stream_len(),
            }
            .into());
        }
        let pool: Vec<usize> = (0..u).collect();

        let mut hcfg = HalvingConfig::for_rate(rate, self.cover.len(), delta, self.cfg.c_halving, self.cfg.min_draws)?;
        hcfg.budget = budget.map(|n| n / 2);
        hcfg.keep_last = regime_violation;
        oracle.set_phase("halving");
        let halving = generalized_halving(oracle, &pool, &self.cover, hcfg, rng)?;

        oracle.set_phase("refining");
        let rbudget = budget.map(|n| (n / 2).max(1));
        let RefineOutcome { sample, complete, calls } = if self.cfg.chunked {
            let chunk = (1.0 / rate).ceil() as usize;
            chunked_refining(oracle, &pool, &halving.classifier, chunk.max(1), rbudget)?
        } else {
            refining(oracle, &pool, &halving.classifier, rbudget)?
        };

        let hypothesis = if sample.is_empty() {
            halving.classifier.clone()
        } else {
            let counts = LabelCounts::from_sample(&sample, |p| oracle.point(p), self.cover.domain_size(), self.cover.k());
            let (best, _) = counts.argmin_error(self.cover.hypotheses());
            self.cover.get(best).clone()
        };
        Ok(AgnosticOutcome {
            hypothesis,
            sample,
            complete,
            u,
            s: hcfg.s.min(u),
            n_draws: hcfg.n_draws,
            cover_size: self.cover.len(),
            survivors: halving.survivors.len(),
            halving_rounds: halving.rounds,
            halving_calls: halving.find_mistake_calls,
            refine_calls: calls,
            regime_violation,
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps {eps} not in (0,1)")));
    }
    Ok(())
}

/// Builds the cover and runs the learner once.
#[allow(clippy::too_many_arguments)]
pub fn agnostic_learn<R: Rng + ?Sized>(
    oracle: &mut dyn CcqOracle,
    space: &HypothesisSpace,
    dom: &Domain,
    beta: f64,
    eps: f64,
    delta: f64,
    cfg: AgnosticConfig,
    rng: &mut R,
) -> Result<AgnosticOutcome> {
    AgnosticLearner::new(space, dom, eps, cfg)?.learn(oracle, beta, delta, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{builtin_space, SpaceSpec};
    use crate::oracle::{true_error, DataSet, DirectOracle, GroundTruth};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pool_size_formula() {
        let u = pool_size(32.0, 2, 0.1, 0.05, 3, 0.1);
        let want = (32.0 * 2.0 * 0.1 / 0.0025 * (3.0f64 / 0.005).ln()).ceil() as usize;
        assert_eq!(u, want);
        assert_eq!(super::super::halving::set_size(1.0 / 64.0 + 1.0 / 64.0), 2);
    }

    #[test]
    fn realizable_thresholds_succeed() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 200, k: 2 }).unwrap();
        let learner = AgnosticLearner::new(&sp, &dom, 0.1, AgnosticConfig::default()).unwrap();
        let mut wins = 0;
        for seed in 0..20 {
            let target = sp.get((seed * 37 % 201) as usize).clone();
            let gt = GroundTruth::realizable(dom.clone(), &target, 2).unwrap();
            let ds = DataSet::draw(gt.clone(), learner.pool_size(0.0, 0.1), seed).unwrap();
            let mut o = DirectOracle::new(&ds);
            let out = learner.learn(&mut o, 0.0, 0.1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(out.sample.iter().all(|&(p, y)| ds.reveal_label(p) == y));
            if true_error(&out.hypothesis, &gt).unwrap() <= 0.1 {
                wins += 1;
            }
        }
        assert!(wins >= 18, "{wins}");
    }

    #[test]
    fn tiny_budget_is_a_failure() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 50, k: 2 }).unwrap();
        let cfg = AgnosticConfig {
            budget: Some(2),
            ..AgnosticConfig::default()
        };
        let learner = AgnosticLearner::new(&sp, &dom, 0.1, cfg).unwrap();
        let gt = GroundTruth::rcn(dom, sp.get(20), 2, 0.2).unwrap();
        let ds = DataSet::draw(gt, learner.pool_size(0.2, 0.1), 1).unwrap();
        let err = learner
            .learn(&mut DirectOracle::new(&ds), 0.2, 0.1, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        assert!(err.is_failure());
    }

    #[test]
    fn short_stream_is_a_failure() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 50, k: 2 }).unwrap();
        let learner = AgnosticLearner::new(&sp, &dom, 0.1, AgnosticConfig::default()).unwrap();
        let gt = GroundTruth::realizable(dom, sp.get(20), 2).unwrap();
        let ds = DataSet::draw(gt, 10, 1).unwrap();
        let err = learner
            .learn(&mut DirectOracle::new(&ds), 0.0, 0.1, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap_err();
        assert!(matches!(err, crate::Error::Failure(Failure::StreamExhausted { .. })));
    }
}
