use serde::{Deserialize, Serialize};

use super::{BatchLearner, BatchRequest};
use crate::agnostic::LabelCounts;
use crate::error::{invalid, Failure, Result};
use crate::hypothesis::{disagreement_count, Domain, HypothesisSpace, Label};

/// Constants of [`DisagreementLearner`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisagreementConfig {
    /// Multiplier in the batch size.
    pub c_m: f64,
    /// Cap on batches, also used in the union bound of the elimination test.
    pub max_batches: usize,
    /// Version spaces up to this size also halt on small diameter.
    pub diameter_check_limit: usize,
}

impl Default for DisagreementConfig {
    fn default() -> Self {
        DisagreementConfig {
            c_m: 64.0,
            max_batches: 256,
            diameter_check_limit: 2000,
        }
    }
}

/// Version-space learner that samples from the disagreement region.
///
/// Work is split into epochs. An epoch fixes `R = DIS(V)` and keeps adding
/// batches from `R`, eliminating every hypothesis whose empirical error on
/// the epoch's sample exceeds the best by more than a Hoeffding deviation
/// bound. The epoch ends once the disagreement mass has halved. The learner
/// halts when that mass, or the diameter of `V`, is at most `eps`.
#[derive(Debug, Clone)]
pub struct DisagreementLearner {
    space: HypothesisSpace,
    dom: Domain,
    eps: f64,
    delta: f64,
    cfg: DisagreementConfig,
    batch_size: usize,
    alive: Vec<usize>,
    region: Vec<bool>,
    epoch_mass: f64,
    counts: LabelCounts,
    batches: usize,
    epochs: usize,
}

impl DisagreementLearner {
    pub fn new(space: &HypothesisSpace, dom: &Domain, eps: f64, delta: f64, alpha: f64, cfg: DisagreementConfig) -> Result<Self> {
        space.check_domain(dom)?;
        if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) || !(0.0..0.5).contains(&alpha) {
            return Err(invalid(format!("bad parameters eps={eps} delta={delta} alpha={alpha}")));
        }
        let d = space
            .natarajan_dim()
            .ok_or_else(|| invalid("the space's Natarajan dimension must be known"))?;
        let rounds = Self::epoch_bound(eps) as f64;
        let batch_size = (cfg.c_m / (1.0 - 2.0 * alpha).powi(2)
            * (d.max(1) as f64 * (1.0 / eps).ln() + (rounds / delta).ln()))
        .ceil() as usize;
        Ok(DisagreementLearner {
            counts: LabelCounts::new(dom.len(), space.k()),
            space: space.clone(),
            dom: dom.clone(),
            eps,
            delta,
            cfg,
            batch_size: batch_size.max(1),
            alive: (0..space.len()).collect(),
            region: Vec::new(),
            epoch_mass: 1.0,
            batches: 0,
            epochs: 0,
        })
    }

    /// `ceil(log2(1/eps)) + 2`.
    pub fn epoch_bound(eps: f64) -> usize {
        (1.0 / eps).log2().ceil() as usize + 2
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn batches(&self) -> usize {
        self.batches
    }

    pub fn survivors(&self) -> usize {
        self.alive.len()
    }

    fn dis_region(&self) -> Vec<bool> {
        let hyps = self.space.hypotheses();
        let first = hyps[self.alive[0]].labels();
        let mut mask = vec![false; self.dom.len()];
        for &h in &self.alive[1..] {
            for (x, (a, b)) in first.iter().zip(hyps[h].labels()).enumerate() {
                if a != b {
                    mask[x] = true;
                }
            }
        }
        mask
    }

    fn diameter_small(&self) -> bool {
        if self.alive.len() > self.cfg.diameter_check_limit {
            return false;
        }
        let hyps = self.space.hypotheses();
        let limit = self.eps;
        for (i, &a) in self.alive.iter().enumerate() {
            for &b in &self.alive[i + 1..] {
                let dist = if self.dom.is_uniform() {
                    disagreement_count(hyps[a].labels(), hyps[b].labels()) as f64 * self.dom.weight(0)
                } else {
                    crate::hypothesis::distance(hyps[a].labels(), hyps[b].labels(), &self.dom)
                };
                if dist > limit {
                    return false;
                }
            }
        }
        true
    }

    fn request(&mut self) -> BatchRequest {
        let hypothesis = self.space.get(self.alive[0]).clone();
        let dis = self.dis_region();
        let mass = self.dom.mass_of(&dis);
        if self.alive.len() == 1 || mass <= self.eps || self.diameter_small() || self.batches >= self.cfg.max_batches {
            if self.batches >= self.cfg.max_batches {
                log::warn!("disagreement learner stopped at its batch cap");
            }
            return BatchRequest {
                region: dis,
                batch_size: self.batch_size,
                proceed: false,
                hypothesis,
            };
        }
        if self.region.is_empty() || mass <= self.epoch_mass / 2.0 {
            self.epochs += 1;
            self.region = dis;
            self.epoch_mass = mass;
            self.counts = LabelCounts::new(self.dom.len(), self.space.k());
        }
        BatchRequest {
            region: self.region.clone(),
            batch_size: self.batch_size,
            proceed: true,
            hypothesis,
        }
    }
}

impl BatchLearner for DisagreementLearner {
    fn start(&mut self) -> Result<BatchRequest> {
        Ok(self.request())
    }

    fn update(&mut self, batch: &[(usize, Label)]) -> Result<BatchRequest> {
        for &(x, y) in batch {
            if x >= self.dom.len() || !self.region.get(x).copied().unwrap_or(false) {
                return Err(invalid(format!("batch point {x} lies outside the requested region")));
            }
            self.counts.add(x, y);
        }
        self.batches += 1;
        let n = self.counts.total();
        if n > 0 {
            let hyps = self.space.hypotheses();
            let errs: Vec<usize> = self.alive.iter().map(|&h| self.counts.mistakes(&hyps[h])).collect();
            let best = *errs.iter().min().expect("version space nonempty");
            let union = 2.0 * self.space.len() as f64 * self.cfg.max_batches as f64 / self.delta;
            let bound = 2.0 * (union.ln() / (2.0 * n as f64)).sqrt();
            let mut keep = errs.iter().map(|&e| (e - best) as f64 / n as f64 <= bound);
            self.alive.retain(|_| keep.next().expect("one flag per hypothesis"));
            if self.alive.is_empty() {
                return Err(Failure::VersionSpaceEmptied { stage: "disagreement elimination" }.into());
            }
        }
        Ok(self.request())
    }
}
