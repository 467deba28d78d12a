//! Disagreement regions, disagreement coefficients and splitting indices of
//! finite spaces.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{distance, Domain, Hypothesis, HypothesisSpace};
use crate::splitting::PairSet;

/// Distances closer than this are treated as equal.
const SNAP: f64 = 1e-12;

/// A set of domain points and its probability mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub points: Vec<bool>,
    pub mass: f64,
}

/// Points where some two of `hyps` disagree.
pub fn disagreement_region(hyps: &[Hypothesis], dom: &Domain) -> Result<Region> {
    let Some(first) = hyps.first() else {
        return Err(invalid("disagreement region of an empty set"));
    };
    for h in hyps {
        if h.len() != dom.len() {
            return Err(Error::DomainMismatch {
                expected: dom.len(),
                actual: h.len(),
            });
        }
    }
    let points: Vec<bool> = (0..dom.len())
        .map(|x| hyps.iter().any(|h| h.label(x) != first.label(x)))
        .collect();
    let mass = dom.mass_of(&points);
    Ok(Region { points, mass })
}

/// The hypotheses of a space within `radius` of `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Hypothesis,
    pub radius: f64,
    /// Indices into the space.
    pub members: Vec<usize>,
}

pub fn ball(center: &Hypothesis, space: &HypothesisSpace, dom: &Domain, radius: f64) -> Result<Ball> {
    space.check_domain(dom)?;
    check_len(center, dom)?;
    let members = space
        .hypotheses()
        .iter()
        .enumerate()
        .filter(|(_, g)| distance(center.labels(), g.labels(), dom) <= radius + SNAP)
        .map(|(i, _)| i)
        .collect();
    Ok(Ball {
        center: center.clone(),
        radius,
        members,
    })
}

fn check_len(h: &Hypothesis, dom: &Domain) -> Result<()> {
    if h.len() != dom.len() {
        return Err(Error::DomainMismatch {
            expected: dom.len(),
            actual: h.len(),
        });
    }
    Ok(())
}

/// `sup_{r > eps} P(DIS(B(h, r))) / r`, exact over the radii where the ball changes.
pub fn disagreement_coefficient(h: &Hypothesis, space: &HypothesisSpace, dom: &Domain, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps {eps} not in (0,1)")));
    }
    space.check_domain(dom)?;
    check_len(h, dom)?;
    let mut by_dist: Vec<(f64, usize)> = space
        .hypotheses()
        .iter()
        .enumerate()
        .map(|(i, g)| (distance(h.labels(), g.labels(), dom), i))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));

    let hyps = space.hypotheses();
    let mut marked = vec![false; dom.len()];
    let mut mass = 0.0;
    let mut add = |g: &Hypothesis, mass: &mut f64| {
        for x in 0..dom.len() {
            if !marked[x] && g.label(x) != h.label(x) {
                marked[x] = true;
                *mass += dom.weight(x);
            }
        }
    };
    let mut best = 0.0f64;
    let mut i = 0;
    // members within eps, then the right limit at eps
    while i < by_dist.len() && by_dist[i].0 <= eps + SNAP {
        add(&hyps[by_dist[i].1], &mut mass);
        i += 1;
    }
    best = best.max(mass / eps);
    while i < by_dist.len() {
        let r = by_dist[i].0;
        while i < by_dist.len() && by_dist[i].0 <= r + SNAP {
            add(&hyps[by_dist[i].1], &mut mass);
            i += 1;
        }
        best = best.max(mass / r);
    }
    Ok(best)
}

/// `max_h theta_h(eps)` over the hypotheses of the space.
pub fn class_disagreement_coefficient(space: &HypothesisSpace, dom: &Domain, eps: f64) -> Result<f64> {
    space
        .hypotheses()
        .iter()
        .try_fold(0.0f64, |acc, h| Ok(acc.max(disagreement_coefficient(h, space, dom, eps)?)))
}

/// Whether `max_y |Q_x^y| <= (1 - rho) |Q|`.
pub fn rho_splits(space: &HypothesisSpace, x: usize, q: &PairSet, rho: f64) -> Result<bool> {
    if q.is_empty() || !(0.0..=1.0).contains(&rho) {
        return Err(invalid("rho-splitting needs a nonempty pair set and rho in [0,1]"));
    }
    let top = q.agreement_counts(space, x).into_iter().max().unwrap_or(0);
    Ok(top as f64 <= (1.0 - rho) * q.len() as f64 + SNAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitIndexConfig {
    /// Round the result down to a multiple of this; 0 keeps it exact.
    pub resolution: f64,
    /// Random sub-selections checked per size and scale.
    pub subsets_per_size: usize,
    /// Largest number of hypothesis pairs enumerated.
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for SplitIndexConfig {
    fn default() -> Self {
        SplitIndexConfig {
            resolution: 0.0,
            subsets_per_size: 8,
            max_pairs: 1_000_000,
            seed: 0,
        }
    }
}

const SUBSET_SIZES: [usize; 4] = [2, 4, 8, 16];

/// Largest `rho` such that the points which `rho`-split `q` have mass at least `tau`.
pub fn split_quantile(space: &HypothesisSpace, dom: &Domain, q: &PairSet, tau: f64) -> f64 {
    if q.is_empty() {
        return 1.0;
    }
    let n = q.len() as f64;
    let mut by_split: Vec<(f64, f64)> = (0..dom.len())
        .map(|x| {
            let top = q.agreement_counts(space, x).into_iter().max().unwrap_or(0);
            (1.0 - top as f64 / n, dom.weight(x))
        })
        .collect();
    by_split.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut mass = 0.0;
    for (s, w) in by_split {
        mass += w;
        if mass + SNAP >= tau {
            return s.max(0.0);
        }
    }
    0.0
}

/// The splitting index `rho_{h,tau}(eps)`: the largest `rho` such that for
/// every scale `Delta >= eps/2`, pairs of `B(h, 4 Delta)` farther apart than
/// `Delta` are `rho`-split with probability at least `tau`.
///
/// The full pair set at each scale is checked exactly; random sub-selections
/// of it only ever lower the estimate.
pub fn splitting_index(
    h: &Hypothesis,
    space: &HypothesisSpace,
    dom: &Domain,
    tau: f64,
    eps: f64,
    cfg: SplitIndexConfig,
) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("need tau in (0,1] and eps in (0,1), got {tau}, {eps}")));
    }
    space.check_domain(dom)?;
    check_len(h, dom)?;
    let hyps = space.hypotheses();
    let n = hyps.len();
    let to_h: Vec<f64> = hyps.iter().map(|g| distance(h.labels(), g.labels(), dom)).collect();
    if n * n.saturating_sub(1) / 2 > cfg.max_pairs {
        return Err(Error::GuardExceeded(format!("{n} hypotheses give too many pairs (limit {})", cfg.max_pairs)));
    }
    let mut pair_dist = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let v = distance(hyps[a].labels(), hyps[b].labels(), dom);
            pair_dist[a * n + b] = v;
            pair_dist[b * n + a] = v;
        }
    }
    let floor = eps / 2.0;
    let mut scales: Vec<f64> = vec![floor];
    scales.extend(pair_dist.iter().copied().filter(|&v| v >= floor));
    scales.extend(to_h.iter().map(|v| v / 4.0).filter(|&v| v >= floor));
    scales.sort_by(f64::total_cmp);
    scales.dedup_by(|a, b| (*a - *b).abs() <= SNAP);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rho = 1.0f64;
    for &delta in &scales {
        let members: Vec<usize> = (0..n).filter(|&a| to_h[a] <= 4.0 * delta + SNAP).collect();
        let q = PairSet::new(
            members
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| members[i + 1..].iter().map(move |&b| (a, b)))
                .filter(|&(a, b)| pair_dist[a * n + b] > delta + SNAP),
        );
        if q.is_empty() {
            continue;
        }
        rho = rho.min(split_quantile(space, dom, &q, tau));
        let all: Vec<(usize, usize)> = q.iter().collect();
        for size in SUBSET_SIZES.into_iter().filter(|&s| s < all.len()) {
            for _ in 0..cfg.subsets_per_size {
                let sub = PairSet::new(sample(&mut rng, all.len(), size).iter().map(|i| all[i]));
                rho = rho.min(split_quantile(space, dom, &sub, tau));
            }
        }
    }
    if cfg.resolution > 0.0 {
        rho = (rho / cfg.resolution + SNAP).floor() * cfg.resolution;
    }
    Ok(rho)
}

/// `min_h rho_{h,tau}(eps)` over the hypotheses of the space.
pub fn class_splitting_index(space: &HypothesisSpace, dom: &Domain, tau: f64, eps: f64, cfg: SplitIndexConfig) -> Result<f64> {
    space
        .hypotheses()
        .iter()
        .try_fold(1.0f64, |acc, h| Ok(acc.min(splitting_index(h, space, dom, tau, eps, cfg)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{builtin_space, SpaceSpec};

    fn thresholds(grid: usize) -> (Domain, HypothesisSpace) {
        builtin_space(&SpaceSpec::Thresholds { grid, k: 2 }).unwrap()
    }

    #[test]
    fn region_of_two_thresholds() {
        let (dom, sp) = thresholds(10);
        let r = disagreement_region(&[sp.get(3).clone(), sp.get(7).clone()], &dom).unwrap();
        assert_eq!(r.points.iter().filter(|p| **p).count(), 4);
        assert!((r.mass - 0.4).abs() < 1e-12);
        let single = disagreement_region(&[sp.get(3).clone()], &dom).unwrap();
        assert_eq!(single.mass, 0.0);
    }

    #[test]
    fn singleton_space_has_zero_coefficient() {
        let (dom, sp) = thresholds(10);
        let one = sp.subspace(&[4]).unwrap();
        assert_eq!(disagreement_coefficient(sp.get(4), &one, &dom, 0.1).unwrap(), 0.0);
        assert_eq!(splitting_index(sp.get(4), &one, &dom, 0.1, 0.1, SplitIndexConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn centered_threshold_coefficient_is_two() {
        let (dom, sp) = thresholds(100);
        let theta = disagreement_coefficient(sp.get(50), &sp, &dom, 0.05).unwrap();
        assert!((theta - 2.0).abs() < 1e-9, "{theta}");
    }

    #[test]
    fn rho_split_cases() {
        let (_, sp) = thresholds(10);
        let q = PairSet::new([(2, 6)]);
        assert!(rho_splits(&sp, 4, &q, 1.0).unwrap());
        assert!(rho_splits(&sp, 0, &q, 0.0).unwrap());
        assert!(!rho_splits(&sp, 0, &q, 0.01).unwrap());
    }

    #[test]
    fn ball_membership() {
        let (dom, sp) = thresholds(20);
        let b = ball(sp.get(10), &sp, &dom, 0.1).unwrap();
        assert_eq!(b.members, (8..=12).collect::<Vec<_>>());
    }
}
