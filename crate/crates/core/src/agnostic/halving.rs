use rand::seq::index::sample;
use rand::Rng;

use super::find_mistake::find_mistake;
use crate::error::{invalid, Failure, Result};
use crate::hypothesis::{plurality_classifier, Hypothesis, HypothesisSpace, Label};
use crate::oracle::CcqOracle;

/// Parameters of one generalized halving run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalvingConfig {
    /// Size of each drawn set.
    pub s: usize,
    /// Sets drawn per loop.
    pub n_draws: usize,
    /// Budget in draw units; a loop runs only while `t <= budget - n_draws`.
    pub budget: Option<u64>,
    /// Stop with the current `V` instead of failing when a loop would remove every hypothesis.
    pub keep_last: bool,
}

impl HalvingConfig {
    /// `s = floor(1 / (16 rate))` and `N = max(min_draws, ceil(c ln(4 log2|V| / delta)))`.
    pub fn for_rate(rate: f64, v_size: usize, delta: f64, c_halving: f64, min_draws: usize) -> Result<Self> {
        if !(rate > 0.0) || !(delta > 0.0 && delta < 1.0) || v_size == 0 {
            return Err(invalid(format!(
                "halving needs rate > 0, delta in (0,1), |V| >= 1 (got {rate}, {delta}, {v_size})"
            )));
        }
        Ok(HalvingConfig {
            s: set_size(rate),
            n_draws: draws(v_size, delta, c_halving, min_draws),
            budget: None,
            keep_last: false,
        })
    }
}

/// `max(1, floor(1 / (16 rate)))`.
pub fn set_size(rate: f64) -> usize {
    ((1.0 / (16.0 * rate)).floor() as usize).max(1)
}

pub(crate) fn draws(v_size: usize, delta: f64, c_halving: f64, min_draws: usize) -> usize {
    let lg = (v_size as f64).log2().max(1.0);
    ((c_halving * (4.0 * lg / delta).ln()).ceil() as usize).max(min_draws).max(1)
}

/// One loop of generalized halving that removed hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalvingRound {
    pub size_before: usize,
    pub removed: usize,
    pub mistake_sets: usize,
    pub n_draws: usize,
}

#[derive(Debug, Clone)]
pub struct HalvingOutcome {
    /// Indices into the input space of the surviving hypotheses.
    pub survivors: Vec<usize>,
    pub classifier: Hypothesis,
    pub rounds: Vec<HalvingRound>,
    /// Draw units consumed (`N` per removal loop).
    pub t: u64,
    pub find_mistake_calls: u64,
    /// A loop would have emptied `V` and `keep_last` stopped it.
    pub stalled: bool,
}

impl HalvingOutcome {
    pub fn survivor_space(&self, space: &HypothesisSpace) -> HypothesisSpace {
        space.subspace(&self.survivors).expect("survivors are nonempty and in range")
    }
}

/// Generalized halving over the hypotheses of `space`, drawing sets from `u`.
pub fn generalized_halving<R: Rng + ?Sized>(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    space: &HypothesisSpace,
    cfg: HalvingConfig,
    rng: &mut R,
) -> Result<HalvingOutcome> {
    if u.is_empty() {
        return Err(invalid("halving needs a nonempty pool"));
    }
    let s = cfg.s.min(u.len());
    let n = cfg.n_draws.max(1);
    let k = space.k();
    let hyps = space.hypotheses();
    let mut alive: Vec<usize> = (0..hyps.len()).collect();
    let mut classifier = plurality_classifier(hyps, k);
    let mut rounds = Vec::new();
    let mut t = 0u64;
    let mut calls = 0u64;
    let mut mistakes: Vec<(usize, Label)> = Vec::with_capacity(n);
    let mut counts = vec![0usize; hyps.len()];
    let mut stalled = false;

    while cfg.budget.is_none_or(|b| t + n as u64 <= b) {
        mistakes.clear();
        for _ in 0..n {
            let set: Vec<usize> = sample(rng, u.len(), s).iter().map(|i| u[i]).collect();
            calls += 1;
            if let Some((p, y)) = find_mistake(oracle, &set, &classifier)? {
                mistakes.push((oracle.point(p), y));
            }
        }
        if mistakes.len() * 3 <= n {
            break;
        }
        for &h in &alive {
            counts[h] = mistakes.iter().filter(|&&(x, y)| hyps[h].label(x) != y).count();
        }
        let size_before = alive.len();
        if cfg.keep_last && alive.iter().all(|&h| counts[h] * 9 > n) {
            log::debug!("halving would empty V of {size_before}; keeping it");
            stalled = true;
            break;
        }
        alive.retain(|&h| counts[h] * 9 <= n);
        let removed = size_before - alive.len();
        // every returned label is a non-plurality label, so at least a quarter goes
        debug_assert!(removed * 4 >= size_before, "removed {removed} of {size_before}");
        rounds.push(HalvingRound {
            size_before,
            removed,
            mistake_sets: mistakes.len(),
            n_draws: n,
        });
        t += n as u64;
        log::trace!("halving round: |V| {size_before} -> {}", alive.len());
        if alive.is_empty() {
            return Err(Failure::VersionSpaceEmptied { stage: "generalized halving" }.into());
        }
        let live: Vec<Hypothesis> = alive.iter().map(|&h| hyps[h].clone()).collect();
        classifier = plurality_classifier(&live, k);
    }
    Ok(HalvingOutcome {
        survivors: alive,
        classifier,
        rounds,
        t,
        find_mistake_calls: calls,
        stalled,
    })
}
