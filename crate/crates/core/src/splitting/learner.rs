use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{eliminate, select_splitter, PairSet, SplitCounters};
use crate::bounded::BoundedDriver;
use crate::error::{invalid, Error, Failure, Result};
use crate::hypothesis::{distance, epsilon_cover, Domain, Hypothesis, HypothesisSpace, Label};
use crate::oracle::CcqOracle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplittingConfig {
    /// Scale of the cover radius `eps0`.
    pub c0: f64,
    /// Scale of the number of splitting passes per batch.
    pub c_s: f64,
    /// Scale of the elimination threshold.
    pub c_e: f64,
    pub max_batches: usize,
    /// Largest cover accepted; the pair distances are held in memory.
    pub max_cover: usize,
}

impl Default for SplittingConfig {
    fn default() -> Self {
        SplittingConfig {
            c0: 1.0 / 64.0,
            c_s: 16.0,
            c_e: 4.0,
            max_batches: 10_000,
            max_cover: 2048,
        }
    }
}

/// How the points chosen by the learner get their labels.
#[derive(Debug, Clone, Copy)]
pub enum Labeling<'a> {
    /// One label request per point.
    Requests,
    /// Class-conditional queries: halving on fresh stream points, then refining over the batch.
    Ccq { driver: &'a BoundedDriver, delta: f64 },
}

#[derive(Debug, Clone)]
pub struct SplittingOutcome {
    pub hypothesis: Hypothesis,
    /// Cover indices still alive at the end.
    pub survivors: Vec<usize>,
    pub cover_size: usize,
    pub eps0: f64,
    /// Size of each labeled batch, in order.
    pub batch_sizes: Vec<usize>,
    /// Stream position after the last consumed point.
    pub cursor: usize,
}

impl SplittingOutcome {
    pub fn labeled_points(&self) -> usize {
        self.batch_sizes.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct SplittingLearner {
    cover: HypothesisSpace,
    dim: usize,
    dist: Vec<f64>,
    eps: f64,
    tau: f64,
    alpha: f64,
    delta: f64,
    eps0: f64,
    cfg: SplittingConfig,
}

impl SplittingLearner {
    pub fn new(
        space: &HypothesisSpace,
        dom: &Domain,
        eps: f64,
        tau: f64,
        alpha: f64,
        delta: f64,
        cfg: SplittingConfig,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || !(tau > 0.0 && tau < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("need eps, tau, delta in (0,1), got {eps}, {tau}, {delta}")));
        }
        if !(0.0..0.5).contains(&alpha) {
            return Err(invalid(format!("alpha {alpha} not in [0, 1/2)")));
        }
        space.check_domain(dom)?;
        let dim = space
            .natarajan_dim()
            .ok_or_else(|| invalid("the space's Natarajan dimension must be known"))?
            .max(1);
        let d = dim as f64;
        let eps0 = cfg.c0 * (1.0 - 2.0 * alpha).powi(2) * eps * tau * tau * delta / d.powi(3);
        let cover = epsilon_cover(space, dom, eps0.min(1.0))?;
        let n = cover.len();
        if n > cfg.max_cover {
            return Err(Error::GuardExceeded(format!("splitting cover has {n} hypotheses (limit {})", cfg.max_cover)));
        }
        let hyps = cover.hypotheses();
        let mut dist = vec![0.0; n * n];
        for h in 0..n {
            for g in h + 1..n {
                let v = distance(hyps[h].labels(), hyps[g].labels(), dom);
                dist[h * n + g] = v;
                dist[g * n + h] = v;
            }
        }
        Ok(SplittingLearner {
            cover,
            dim,
            dist,
            eps,
            tau,
            alpha,
            delta,
            eps0,
            cfg,
        })
    }

    pub fn cover(&self) -> &HypothesisSpace {
        &self.cover
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// `ceil(log2(2/eps))`.
    pub fn epochs(&self) -> u32 {
        (2.0 / self.eps).log2().ceil().max(1.0) as u32
    }

    /// Splitting passes per batch: `ceil(c_s/(1-2 alpha)^2 (d ln(1/eps) + ln(1/delta)))`.
    pub fn passes(&self) -> usize {
        let d = self.dim as f64;
        let v = self.cfg.c_s / (1.0 - 2.0 * self.alpha).powi(2) * (d * (1.0 / self.eps).ln() + (1.0 / self.delta).ln());
        (v.ceil() as usize).max(1)
    }

    /// Alive pairs at distance above `threshold`.
    pub fn pairs_above(&self, alive: &[bool], threshold: f64) -> PairSet {
        let n = self.cover.len();
        PairSet::new(
            (0..n)
                .filter(|&h| alive[h])
                .flat_map(|h| (h + 1..n).filter(move |&g| alive[g]).map(move |g| (h, g)))
                .filter(|&(h, g)| self.dist[h * n + g] > threshold),
        )
    }

    pub fn run<R: Rng + ?Sized>(&self, oracle: &mut dyn CcqOracle, labeling: Labeling<'_>, rng: &mut R) -> Result<SplittingOutcome> {
        let n = self.cover.len();
        let d = self.dim;
        let passes = self.passes();
        let mut alive = vec![true; n];
        let mut m = SplitCounters::new(n);
        let mut cursor = 0usize;
        let mut batch_sizes = Vec::new();
        for t in 1..=self.epochs() {
            let mut q = self.pairs_above(&alive, 0.5f64.powi(t as i32));
            while !q.is_empty() {
                if batch_sizes.len() >= self.cfg.max_batches {
                    return Err(Failure::NoCompletion(format!("{} pairs left after {} batches", q.len(), batch_sizes.len())).into());
                }
                let mut s = Vec::new();
                for _ in 0..passes {
                    let mut qt = q.clone();
                    while !qt.is_empty() {
                        let (pos, y, next) = select_splitter(oracle, &self.cover, cursor, &qt, self.tau)?;
                        cursor = next;
                        s.push(pos);
                        qt = qt.agreeing(&self.cover, oracle.point(pos), y);
                    }
                }
                let labels: Vec<Label> = match labeling {
                    Labeling::Requests => {
                        oracle.set_phase("splitting/labels");
                        s.iter().map(|&p| oracle.request_label(p)).collect::<Result<_>>()?
                    }
                    Labeling::Ccq { driver, delta } => {
                        let (labels, next) = driver.label_positions(oracle, &s, cursor, self.alpha, delta, rng)?;
                        cursor = next;
                        labels
                    }
                };
                for (&p, &y) in s.iter().zip(&labels) {
                    m.record(&self.cover, &alive, oracle.point(p), y);
                }
                let removed = eliminate(&mut alive, &m, d, self.eps0, self.cfg.c_e);
                if !alive.iter().any(|a| *a) {
                    return Err(Failure::VersionSpaceEmptied { stage: "splitting elimination" }.into());
                }
                q.retain_alive(&alive);
                log::debug!("epoch {t}: batch of {} removed {removed}, {} pairs left", s.len(), q.len());
                batch_sizes.push(s.len());
            }
        }
        let survivors: Vec<usize> = (0..n).filter(|&h| alive[h]).collect();
        Ok(SplittingOutcome {
            hypothesis: self.cover.get(survivors[0]).clone(),
            survivors,
            cover_size: n,
            eps0: self.eps0,
            batch_sizes,
            cursor,
        })
    }
}

/// Builds the learner and runs it with label requests.
#[allow(clippy::too_many_arguments)]
pub fn splitting_active_learn<R: Rng + ?Sized>(
    oracle: &mut dyn CcqOracle,
    space: &HypothesisSpace,
    dom: &Domain,
    eps: f64,
    tau: f64,
    alpha: f64,
    delta: f64,
    cfg: SplittingConfig,
    rng: &mut R,
) -> Result<SplittingOutcome> {
    SplittingLearner::new(space, dom, eps, tau, alpha, delta, cfg)?.run(oracle, Labeling::Requests, rng)
}
