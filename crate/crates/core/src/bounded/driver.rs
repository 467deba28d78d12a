use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BatchLearner, BatchRequest};
use crate::agnostic::{generalized_halving, halving_draws, refining, set_size, HalvingConfig, REGIME_LIMIT};
use crate::error::{invalid, Failure, Result};
use crate::hypothesis::{epsilon_cover, Domain, Hypothesis, HypothesisSpace, Label, LabeledSample};
use crate::oracle::CcqOracle;

/// Constants of the bounded-noise driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundedConfig {
    /// Multiplier in the halving pool size `ps`.
    pub c_u: f64,
    pub c_halving: f64,
    pub min_draws: usize,
    /// Per-round confidence; `delta eps^2 (1-2 alpha)^2 / (64 d)` when unset.
    pub delta_prime: Option<f64>,
    /// Multiplier in the refining budget of the budgeted variant.
    pub c_b: f64,
    /// Keep every labeled batch in the outcome.
    pub keep_batches: bool,
    pub max_rounds: usize,
}

impl Default for BoundedConfig {
    fn default() -> Self {
        BoundedConfig {
            c_u: 32.0,
            c_halving: 48.0,
            min_draws: 24,
            delta_prime: None,
            c_b: 8.0,
            keep_batches: false,
            max_rounds: 1000,
        }
    }
}

/// Accounting for one round of the driver.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub region_mass: f64,
    pub batch_size: usize,
    pub ps: usize,
    pub s: usize,
    pub n_draws: usize,
    pub halving_rounds: usize,
    pub halving_calls: u64,
    pub refine_calls: u64,
    pub ccq: u64,
    pub cover_size: usize,
    pub halving_stalled: bool,
    /// Stream position after the round.
    pub cursor: usize,
    /// The labeled batch, when kept.
    pub batch: Option<LabeledSample>,
}

#[derive(Debug, Clone)]
pub struct BoundedOutcome {
    pub hypothesis: Hypothesis,
    pub rounds: Vec<RoundRecord>,
    pub delta_prime: f64,
}

/// Labels the batches of a region-based learner with halving and refining.
///
/// Halving runs over an `eps`-cover taken with respect to the marginal
/// restricted to the requested region, rebuilt whenever the region changes.
#[derive(Debug, Clone)]
pub struct BoundedDriver {
    space: HypothesisSpace,
    cover: HypothesisSpace,
    dom: Domain,
    dim: usize,
    eps: f64,
    cfg: BoundedConfig,
}

impl BoundedDriver {
    pub fn new(space: &HypothesisSpace, dom: &Domain, eps: f64, cfg: BoundedConfig) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("eps {eps} not in (0,1)")));
        }
        let cover = epsilon_cover(space, dom, eps)?;
        let dim = space
            .natarajan_dim()
            .ok_or_else(|| invalid("the space's Natarajan dimension must be known"))?;
        Ok(BoundedDriver {
            space: space.clone(),
            cover,
            dom: dom.clone(),
            dim,
            eps,
            cfg,
        })
    }

    /// The cover for the full marginal, used while the region is the whole domain.
    pub fn cover(&self) -> &HypothesisSpace {
        &self.cover
    }

    /// An `eps`-cover of the space under the marginal conditioned on `region`.
    pub fn region_cover(&self, region: &[bool]) -> Result<HypothesisSpace> {
        if region.iter().all(|r| *r) {
            return Ok(self.cover.clone());
        }
        let mass = self.dom.mass_of(region);
        if mass <= 0.0 {
            return Err(invalid("region has no probability mass"));
        }
        let weights = self
            .dom
            .weights()
            .iter()
            .zip(region)
            .map(|(w, r)| if *r { w / mass } else { 0.0 })
            .collect();
        epsilon_cover(&self.space, &Domain::new(weights)?, self.eps)
    }

    pub fn config(&self) -> &BoundedConfig {
        &self.cfg
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta_prime(&self, delta: f64, alpha: f64) -> f64 {
        self.cfg
            .delta_prime
            .unwrap_or(delta * self.eps * self.eps * (1.0 - 2.0 * alpha).powi(2) / (64.0 * self.dim.max(1) as f64))
    }

    /// `ceil(c_u d / eps^2 ln(k / (eps delta)))`.
    pub fn halving_pool(&self, delta: f64) -> usize {
        (self.cfg.c_u * self.dim.max(1) as f64 / (self.eps * self.eps) * (self.cover.k() as f64 / (self.eps * delta)).ln())
            .ceil() as usize
    }

    /// Runs with noise bound `alpha`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        learner: &mut dyn BatchLearner,
        alpha: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<BoundedOutcome> {
        self.drive(oracle, learner, alpha, delta, false, rng)
    }

    /// Runs with a refining budget of `ceil(c_b (1 + alpha m) ln(1/delta'))`
    /// per batch; a batch left incomplete is a failure.
    pub fn run_budgeted<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        learner: &mut dyn BatchLearner,
        alpha: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<BoundedOutcome> {
        self.drive(oracle, learner, alpha, delta, true, rng)
    }

    /// Labels the given stream positions exactly, with halving over the `ps`
    /// stream points starting at `pool_start` and refining over `positions`.
    ///
    /// Returns the labels in the order of `positions` and the cursor after the pool.
    pub fn label_positions<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        positions: &[usize],
        pool_start: usize,
        alpha: f64,
        delta: f64,
        rng: &mut R,
    ) -> Result<(Vec<Label>, usize)> {
        if !(0.0..0.5).contains(&alpha) || !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("need alpha in [0,1/2) and delta in (0,1), got {alpha}, {delta}")));
        }
        if positions.is_empty() {
            return Ok((Vec::new(), pool_start));
        }
        let ps = self.halving_pool(delta);
        let len = oracle.stream_len();
        if pool_start + ps > len {
            return Err(Failure::StreamExhausted {
                needed: pool_start + ps - len,
                available: len.saturating_sub(pool_start),
            }
            .into());
        }
        let dprime = self.delta_prime(delta, alpha);
        let hcfg = HalvingConfig {
            s: set_size(alpha + self.eps),
            n_draws: halving_draws(self.cover.len(), dprime, self.cfg.c_halving, self.cfg.min_draws),
            budget: None,
            keep_last: alpha + self.eps > REGIME_LIMIT,
        };
        let pool: Vec<usize> = (pool_start..pool_start + ps).collect();
        oracle.set_phase("batch/halving");
        let halving = generalized_halving(oracle, &pool, &self.cover, hcfg, rng)?;
        oracle.set_phase("batch/refining");
        let refined = refining(oracle, positions, &halving.classifier, None)?;
        let found: std::collections::HashMap<usize, Label> = refined.sample.iter().copied().collect();
        let labels = positions.iter().map(|p| found[p]).collect();
        Ok((labels, pool_start + ps))
    }

    fn drive<R: Rng + ?Sized>(
        &self,
        oracle: &mut dyn CcqOracle,
        learner: &mut dyn BatchLearner,
        alpha: f64,
        delta: f64,
        budgeted: bool,
        rng: &mut R,
    ) -> Result<BoundedOutcome> {
        if !(0.0..0.5).contains(&alpha) || !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("need alpha in [0,1/2) and delta in (0,1), got {alpha}, {delta}")));
        }
        let dprime = self.delta_prime(delta, alpha);
        let ps = self.halving_pool(delta);
        let mut req: BatchRequest = learner.start()?;
        let mut cursor = 0usize;
        let mut rounds = Vec::new();
        let mut cached: Option<(Vec<bool>, HypothesisSpace)> = None;
        while req.proceed {
            if rounds.len() >= self.cfg.max_rounds {
                return Err(Failure::NoCompletion(format!("batch learner still running after {} rounds", rounds.len())).into());
            }
            if req.region.len() != self.dom.len() || req.batch_size == 0 {
                return Err(invalid("batch request must cover the domain and ask for at least one example"));
            }
            if cached.as_ref().is_none_or(|(r, _)| *r != req.region) {
                cached = Some((req.region.clone(), self.region_cover(&req.region)?));
            }
            let cover = &cached.as_ref().expect("set above").1;
            let hcfg = HalvingConfig {
                s: set_size(alpha + self.eps),
                n_draws: halving_draws(cover.len(), dprime, self.cfg.c_halving, self.cfg.min_draws),
                budget: None,
                keep_last: alpha + self.eps > REGIME_LIMIT,
            };
            let m = req.batch_size;
            let picked = take_in_region(oracle, &req.region, cursor, ps + m)?;
            let (u1, u2) = picked.split_at(ps);
            let before = oracle.ledger().ccq_count();
            let r = rounds.len();

            oracle.set_phase(&format!("round{r}/halving"));
            let halving = generalized_halving(oracle, u1, cover, hcfg, rng)?;

            oracle.set_phase(&format!("round{r}/refining"));
            let budget = budgeted.then(|| (self.cfg.c_b * (1.0 + alpha * m as f64) * (1.0 / dprime).ln()).ceil() as u64);
            let refined = refining(oracle, u2, &halving.classifier, budget.map(|b| b.max(1)))?;
            if !refined.complete {
                return Err(Failure::Incomplete {
                    labeled: refined.sample.len(),
                    required: m,
                }
                .into());
            }
            let batch: Vec<(usize, Label)> = refined.sample.iter().map(|&(p, y)| (oracle.point(p), y)).collect();
            cursor = *picked.last().expect("nonempty") + 1;
            rounds.push(RoundRecord {
                region_mass: self.dom.mass_of(&req.region),
                batch_size: m,
                ps,
                s: hcfg.s.min(ps),
                n_draws: hcfg.n_draws,
                halving_rounds: halving.rounds.len(),
                halving_calls: halving.find_mistake_calls,
                refine_calls: refined.calls,
                ccq: oracle.ledger().ccq_count() - before,
                cover_size: cover.len(),
                halving_stalled: halving.stalled,
                cursor,
                batch: self.cfg.keep_batches.then(|| refined.sample.clone()),
            });
            req = learner.update(&batch)?;
        }
        Ok(BoundedOutcome {
            hypothesis: req.hypothesis,
            rounds,
            delta_prime: dprime,
        })
    }
}

/// The first `count` positions at or after `start` whose point lies in `region`.
fn take_in_region(oracle: &dyn CcqOracle, region: &[bool], start: usize, count: usize) -> Result<Vec<usize>> {
    let len = oracle.stream_len();
    let mut out = Vec::with_capacity(count);
    let mut p = start;
    while out.len() < count {
        if p >= len {
            return Err(Failure::StreamExhausted {
                needed: count - out.len(),
                available: 0,
            }
            .into());
        }
        if region[oracle.point(p)] {
            out.push(p);
        }
        p += 1;
    }
    Ok(out)
}

/// Builds the driver and runs it once with noise bound `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn bounded_noise_learn<R: Rng + ?Sized>(
    oracle: &mut dyn CcqOracle,
    space: &HypothesisSpace,
    dom: &Domain,
    eps: f64,
    delta: f64,
    alpha: f64,
    learner: &mut dyn BatchLearner,
    cfg: BoundedConfig,
    rng: &mut R,
) -> Result<BoundedOutcome> {
    BoundedDriver::new(space, dom, eps, cfg)?.run(oracle, learner, alpha, delta, rng)
}
