use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Domain, Hypothesis, HypothesisSpace, Label};
use crate::seed::{derive, unit_f64};

const ROW_TOLERANCE: f64 = 1e-12;

/// A joint distribution over (point, label): the domain marginal plus one
/// conditional label distribution per point.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    domain: Domain,
    k: Label,
    cond: Vec<f64>,
    point_mass: Vec<Label>,
    best: Option<Hypothesis>,
}

impl GroundTruth {
    /// `rows[x][y - 1]` is `P(Y = y | X = x)`.
    pub fn new(domain: Domain, k: Label, rows: Vec<Vec<f64>>, best: Option<Hypothesis>) -> Result<Self> {
        if rows.len() != domain.len() {
            return Err(Error::DomainMismatch {
                expected: domain.len(),
                actual: rows.len(),
            });
        }
        let kk = k as usize;
        let mut cond = Vec::with_capacity(rows.len() * kk);
        let mut point_mass = Vec::with_capacity(rows.len());
        for (x, row) in rows.iter().enumerate() {
            if row.len() != kk {
                return Err(invalid(format!("conditional at point {x} has {} entries, k = {k}", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(invalid(format!("conditional at point {x} has an entry outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOLERANCE {
                return Err(invalid(format!("conditional at point {x} sums to {s}")));
            }
            point_mass.push(row.iter().position(|p| *p == 1.0).map_or(0, |i| i as Label + 1));
            cond.extend_from_slice(row);
        }
        if let Some(h) = &best {
            h.check(domain.len(), k)?;
        }
        Ok(GroundTruth {
            domain,
            k,
            cond,
            point_mass,
            best,
        })
    }

    pub fn realizable(domain: Domain, target: &Hypothesis, k: Label) -> Result<Self> {
        Self::rcn(domain, target, k, 0.0)
    }

    /// Random classification noise: every wrong label gets `alpha / (k - 1)`.
    pub fn rcn(domain: Domain, target: &Hypothesis, k: Label, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if k < 2 && alpha > 0.0 {
            return Err(invalid("noise needs at least two labels"));
        }
        target.check(domain.len(), k)?;
        let wrong = if k > 1 { alpha / (k as f64 - 1.0) } else { 0.0 };
        let rows = target
            .labels()
            .iter()
            .map(|&t| {
                (1..=k)
                    .map(|y| if y == t { 1.0 - alpha } else { wrong })
                    .collect()
            })
            .collect();
        Self::new(domain, k, rows, Some(target.clone()))
    }

    /// Bounded noise: the label differs from the target with probability
    /// `flips[x] <= alpha`, spread over wrong labels by `wrong[x]` (uniform if `None`).
    pub fn bounded(
        domain: Domain,
        target: &Hypothesis,
        k: Label,
        alpha: f64,
        flips: &[f64],
        wrong: Option<&[Vec<f64>]>,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        target.check(domain.len(), k)?;
        if flips.len() != domain.len() {
            return Err(Error::DomainMismatch {
                expected: domain.len(),
                actual: flips.len(),
            });
        }
        if let Some(f) = flips.iter().find(|f| !(0.0..=alpha).contains(*f)) {
            return Err(invalid(format!("flip probability {f} outside [0, {alpha}]")));
        }
        if k < 2 && flips.iter().any(|f| *f > 0.0) {
            return Err(invalid("noise needs at least two labels"));
        }
        let mut rows = Vec::with_capacity(domain.len());
        for (x, &t) in target.labels().iter().enumerate() {
            let mut row = vec![0.0; k as usize];
            match wrong {
                Some(w) => {
                    let dest = &w[x];
                    let total: f64 = (1..=k).filter(|y| *y != t).map(|y| dest[y as usize - 1]).sum();
                    if dest.len() != k as usize || total <= 0.0 {
                        return Err(invalid(format!("bad wrong-label distribution at point {x}")));
                    }
                    for y in (1..=k).filter(|y| *y != t) {
                        row[y as usize - 1] = flips[x] * dest[y as usize - 1] / total;
                    }
                }
                None => {
                    for y in (1..=k).filter(|y| *y != t) {
                        row[y as usize - 1] = flips[x] / (k as f64 - 1.0);
                    }
                }
            }
            row[t as usize - 1] = 1.0 - flips[x];
            rows.push(row);
        }
        Self::new(domain, k, rows, Some(target.clone()))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn k(&self) -> Label {
        self.k
    }

    /// `P(Y = y | X = x)`.
    #[inline]
    pub fn prob(&self, x: usize, y: Label) -> f64 {
        self.cond[x * self.k as usize + y as usize - 1]
    }

    pub fn conditional(&self, x: usize) -> &[f64] {
        let k = self.k as usize;
        &self.cond[x * k..(x + 1) * k]
    }

    pub fn best_hypothesis(&self) -> Option<&Hypothesis> {
        self.best.as_ref()
    }

    /// Error rate of the known best hypothesis, when there is one.
    pub fn noise_rate(&self) -> Option<f64> {
        self.best.as_ref().map(|h| self.error_of(h.labels()))
    }

    /// Pointwise most likely label, ties to the smallest label.
    pub fn bayes_classifier(&self) -> Hypothesis {
        Hypothesis::new(
            (0..self.domain.len())
                .map(|x| {
                    let row = self.conditional(x);
                    let mut best = 0;
                    for y in 1..row.len() {
                        if row[y] > row[best] {
                            best = y;
                        }
                    }
                    best as Label + 1
                })
                .collect(),
        )
    }

    pub(crate) fn error_of(&self, labels: &[Label]) -> f64 {
        labels
            .iter()
            .enumerate()
            .map(|(x, &l)| self.domain.weight(x) * (1.0 - self.prob(x, l)))
            .sum()
    }

    /// Smallest true error over `space` and the index attaining it.
    pub fn best_in(&self, space: &HypothesisSpace) -> (usize, f64) {
        space
            .hypotheses()
            .iter()
            .enumerate()
            .map(|(i, h)| (i, self.error_of(h.labels())))
            .fold((0, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc })
    }

    /// Draws a label at `x` from one uniform variate.
    #[inline]
    pub(crate) fn sample_label(&self, x: usize, u: f64) -> Label {
        let pm = self.point_mass[x];
        if pm != 0 {
            return pm;
        }
        let row = self.conditional(x);
        let mut acc = 0.0;
        for (i, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return i as Label + 1;
            }
        }
        // rounding left u above the last partial sum
        row.iter().rposition(|p| *p > 0.0).unwrap_or(0) as Label + 1
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(invalid(format!("noise rate {alpha} not in [0, 1/2)")));
    }
    Ok(())
}

/// Exact true error of `h` under `gt`.
pub fn true_error(h: &Hypothesis, gt: &GroundTruth) -> Result<f64> {
    h.check(gt.domain.len(), gt.k)?;
    Ok(gt.error_of(h.labels()))
}

/// Parameters of the hard agnostic instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardInstance {
    pub beta: f64,
    pub gamma: f64,
}

impl HardInstance {
    pub fn new(eta: f64, eps: f64) -> Result<Self> {
        if !(eta >= 0.0 && eps > 0.0 && eta + 2.0 * eps < 0.5) {
            return Err(invalid(format!("hard instance needs eta + 2 eps < 1/2, got eta={eta} eps={eps}")));
        }
        Ok(HardInstance {
            beta: 2.0 * (eta + 2.0 * eps),
            gamma: eps / (eta + 2.0 * eps),
        })
    }
}

/// The hard agnostic instance on `d` points with `k = 2`.
///
/// Point 0 has mass `1 - beta` and label 1 surely. Each other point has mass
/// `beta / (d - 1)` and label 2 with probability `1/2 + gamma * signs[i-1]`.
/// Returned with the space of all labelings that put 1 on point 0.
pub fn agnostic_hard(d: usize, eta: f64, eps: f64, signs: &[i8]) -> Result<(GroundTruth, HypothesisSpace)> {
    if !(2..=21).contains(&d) {
        return Err(invalid(format!("hard instance needs 2 <= d <= 21, got {d}")));
    }
    if signs.len() != d - 1 || signs.iter().any(|b| b.abs() != 1) {
        return Err(invalid(format!("need {} signs in {{-1, +1}}", d - 1)));
    }
    let HardInstance { beta, gamma } = HardInstance::new(eta, eps)?;
    let mut weights = vec![beta / (d - 1) as f64; d];
    weights[0] = 1.0 - beta;
    let domain = Domain::new(weights)?;
    let mut rows = vec![vec![1.0, 0.0]];
    let mut best = vec![1];
    for &b in signs {
        let p2 = 0.5 + gamma * b as f64;
        rows.push(vec![1.0 - p2, p2]);
        best.push(if b > 0 { 2 } else { 1 });
    }
    let hyps = (0..1usize << (d - 1))
        .map(|code| {
            Hypothesis::new(
                std::iter::once(1)
                    .chain((0..d - 1).map(|i| if code >> i & 1 == 1 { 2 } else { 1 }))
                    .collect(),
            )
        })
        .collect();
    let space = HypothesisSpace::from_parts(2, d, hyps, Some(d - 1));
    let gt = GroundTruth::new(domain, 2, rows, Some(Hypothesis::new(best)))?;
    Ok((gt, space))
}

/// How bounded-noise flip probabilities vary over the domain.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipProfile {
    /// Every point flips with probability exactly `alpha`.
    #[default]
    Max,
    /// Each point flips with an independent uniform probability in `[0, alpha]`.
    Random,
}

/// Label-noise model applied around a target hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    Realizable,
    Rcn {
        alpha: f64,
    },
    Bounded {
        alpha: f64,
        #[serde(default)]
        profile: FlipProfile,
    },
}

impl NoiseSpec {
    /// Nominal noise level; for bounded noise, the per-point bound.
    pub fn level(&self) -> f64 {
        match *self {
            NoiseSpec::Realizable => 0.0,
            NoiseSpec::Rcn { alpha } | NoiseSpec::Bounded { alpha, .. } => alpha,
        }
    }

    pub fn with_level(&self, level: f64) -> NoiseSpec {
        match *self {
            NoiseSpec::Realizable if level == 0.0 => NoiseSpec::Realizable,
            NoiseSpec::Realizable | NoiseSpec::Rcn { .. } => NoiseSpec::Rcn { alpha: level },
            NoiseSpec::Bounded { profile, .. } => NoiseSpec::Bounded {
                alpha: level,
                profile,
            },
        }
    }
}

/// Builds the distribution `spec` around `target`; `seed` drives random flip profiles.
pub fn build_distribution(
    spec: &NoiseSpec,
    domain: &Domain,
    target: &Hypothesis,
    k: Label,
    seed: u64,
) -> Result<GroundTruth> {
    match *spec {
        NoiseSpec::Realizable => GroundTruth::realizable(domain.clone(), target, k),
        NoiseSpec::Rcn { alpha } => GroundTruth::rcn(domain.clone(), target, k, alpha),
        NoiseSpec::Bounded { alpha, profile } => {
            let flips: Vec<f64> = match profile {
                FlipProfile::Max => vec![alpha; domain.len()],
                FlipProfile::Random => (0..domain.len())
                    .map(|x| alpha * unit_f64(derive(seed, &[x as u64])))
                    .collect(),
            };
            GroundTruth::bounded(domain.clone(), target, k, alpha, &flips, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{builtin_space, SpaceSpec};

    #[test]
    fn realizable_has_zero_noise() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 10, k: 2 }).unwrap();
        let gt = GroundTruth::realizable(dom, sp.get(4), 2).unwrap();
        assert_eq!(gt.noise_rate(), Some(0.0));
        assert_eq!(true_error(sp.get(4), &gt).unwrap(), 0.0);
    }

    #[test]
    fn rcn_spreads_wrong_mass() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 10, k: 3 }).unwrap();
        let gt = GroundTruth::rcn(dom, sp.get(3), 3, 0.2).unwrap();
        for x in 0..10 {
            let t = sp.get(3).label(x);
            for y in 1..=3 {
                let want = if y == t { 0.8 } else { 0.1 };
                assert!((gt.prob(x, y) - want).abs() < 1e-15);
            }
        }
        assert!((true_error(sp.get(3), &gt).unwrap() - 0.2).abs() < 1e-12);
        let (i, e) = gt.best_in(&sp);
        assert_eq!(i, 3);
        assert!((e - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_regime() {
        let dom = Domain::uniform(3).unwrap();
        let h = Hypothesis::new(vec![1, 2, 1]);
        assert!(GroundTruth::rcn(dom.clone(), &h, 2, 0.5).is_err());
        assert!(GroundTruth::bounded(dom.clone(), &h, 2, 0.2, &[0.1, 0.3, 0.0], None).is_err());
        assert!(GroundTruth::new(dom, 2, vec![vec![0.5, 0.6]; 3], None).is_err());
        assert!(agnostic_hard(3, 0.2, 0.15, &[1, 1]).is_err());
        assert!(agnostic_hard(1, 0.1, 0.01, &[]).is_err());
    }

    #[test]
    fn hard_instance_parameters() {
        let (gt, sp) = agnostic_hard(3, 0.1, 0.05, &[1, -1]).unwrap();
        let hi = HardInstance::new(0.1, 0.05).unwrap();
        assert!((hi.beta - 0.4).abs() < 1e-15);
        assert!((hi.gamma - 0.25).abs() < 1e-15);
        assert!((gt.domain().weight(0) - 0.6).abs() < 1e-15);
        assert!((gt.prob(1, 2) - 0.75).abs() < 1e-15);
        assert!((gt.prob(2, 2) - 0.25).abs() < 1e-15);
        assert_eq!(sp.len(), 4);
        assert!((gt.noise_rate().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn hard_instance_best_in_space_is_eta() {
        for d in [2, 4, 7] {
            let signs = vec![1i8; d - 1];
            let (gt, sp) = agnostic_hard(d, 0.08, 0.02, &signs).unwrap();
            let (_, e) = gt.best_in(&sp);
            assert!((e - 0.08).abs() < 1e-12);
            assert_eq!(gt.bayes_classifier(), *gt.best_hypothesis().unwrap());
        }
    }

    #[test]
    fn true_error_matches_exhaustive_sum() {
        let (gt, sp) = agnostic_hard(5, 0.1, 0.03, &[1, -1, 1, -1]).unwrap();
        for h in sp.hypotheses() {
            let mut brute = 0.0;
            for x in 0..5 {
                for y in 1..=2 {
                    if h.label(x) != y {
                        brute += gt.domain().weight(x) * gt.prob(x, y);
                    }
                }
            }
            assert!((true_error(h, &gt).unwrap() - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn random_profile_respects_bound() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 50, k: 2 }).unwrap();
        let spec = NoiseSpec::Bounded {
            alpha: 0.3,
            profile: FlipProfile::Random,
        };
        let gt = build_distribution(&spec, &dom, sp.get(20), 2, 9).unwrap();
        let t = sp.get(20);
        for x in 0..50 {
            assert!(1.0 - gt.prob(x, t.label(x)) <= 0.3);
        }
        assert!(gt.noise_rate().unwrap() < 0.3);
    }
}
