use std::collections::HashSet;

use super::{Domain, HypothesisSpace, Label};
use crate::error::{Error, Result};

/// Size limits for the brute-force Natarajan dimension search.
#[derive(Debug, Clone, Copy)]
pub struct NatarajanGuard {
    pub max_points: usize,
    pub max_hypotheses: usize,
}

impl Default for NatarajanGuard {
    fn default() -> Self {
        NatarajanGuard {
            max_points: 20,
            max_hypotheses: 4096,
        }
    }
}

/// Largest `m` such that some `m` points are N-shattered by `space`.
///
/// Points `x_1..x_m` are N-shattered when there are witness labels
/// `b_i != c_i` such that every choice of `b` or `c` per point is realized.
pub fn natarajan_dimension(
    space: &HypothesisSpace,
    dom: &Domain,
    guard: NatarajanGuard,
) -> Result<usize> {
    space.check_domain(dom)?;
    let n = dom.len();
    if n > guard.max_points || space.len() > guard.max_hypotheses {
        return Err(Error::GuardExceeded(format!(
            "{n} points and {} hypotheses exceed the limit of {} points and {} hypotheses",
            space.len(),
            guard.max_points,
            guard.max_hypotheses
        )));
    }
    let mut best = 0;
    let mut m = 1;
    // shattering m points needs 2^m distinct restrictions
    while m <= n && (1usize << m) <= space.len() {
        if !any_subset_shattered(space, n, m) {
            break;
        }
        best = m;
        m += 1;
    }
    Ok(best)
}

fn any_subset_shattered(space: &HypothesisSpace, n: usize, m: usize) -> bool {
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        let patterns: HashSet<Vec<Label>> = space
            .hypotheses()
            .iter()
            .map(|h| subset.iter().map(|&x| h.label(x)).collect())
            .collect();
        if patterns.len() >= 1 << m && witnessed(&patterns, &subset, space.k()) {
            return true;
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if subset[i] < n - m + i {
                subset[i] += 1;
                for j in i + 1..m {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn witnessed(patterns: &HashSet<Vec<Label>>, subset: &[usize], k: Label) -> bool {
    let m = subset.len();
    // candidate witness pairs per point: labels that actually occur there
    let occurring: Vec<Vec<Label>> = (0..m)
        .map(|i| {
            let mut ls: Vec<Label> = (1..=k).filter(|l| patterns.iter().any(|p| p[i] == *l)).collect();
            ls.dedup();
            ls
        })
        .collect();
    let pairs: Vec<Vec<(Label, Label)>> = occurring
        .iter()
        .map(|ls| {
            let mut v = Vec::new();
            for (a, &b) in ls.iter().enumerate() {
                for &c in &ls[a + 1..] {
                    v.push((b, c));
                }
            }
            v
        })
        .collect();
    if pairs.iter().any(|p| p.is_empty()) {
        return false;
    }
    let mut choice = vec![0usize; m];
    let mut probe = vec![0 as Label; m];
    loop {
        let all = (0..1usize << m).all(|mask| {
            for i in 0..m {
                let (b, c) = pairs[i][choice[i]];
                probe[i] = if mask >> i & 1 == 1 { b } else { c };
            }
            patterns.contains(&probe)
        });
        if all {
            return true;
        }
        let mut i = 0;
        loop {
            if i == m {
                return false;
            }
            choice[i] += 1;
            if choice[i] < pairs[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_space, Hypothesis, SpaceSpec};
    use super::*;

    fn dim(spec: SpaceSpec) -> usize {
        let (dom, sp) = builtin_space(&spec).unwrap();
        natarajan_dimension(&sp, &dom, NatarajanGuard::default()).unwrap()
    }

    #[test]
    fn single_hypothesis_has_dimension_zero() {
        let dom = Domain::uniform(4).unwrap();
        let sp = HypothesisSpace::new(3, vec![Hypothesis::new(vec![1, 2, 3, 1])], None).unwrap();
        assert_eq!(natarajan_dimension(&sp, &dom, NatarajanGuard::default()).unwrap(), 0);
    }

    #[test]
    fn known_dimensions() {
        assert_eq!(dim(SpaceSpec::Thresholds { grid: 12, k: 2 }), 1);
        assert_eq!(dim(SpaceSpec::Intervals { grid: 10, k: 2 }), 2);
        assert_eq!(dim(SpaceSpec::Shattered { d: 3, k: 2 }), 3);
        assert_eq!(dim(SpaceSpec::Shattered { d: 3, k: 3 }), 3);
    }

    #[test]
    fn multiclass_witness_pairs() {
        // labels 2/3 on point 0 and 1/3 on point 1, all four combinations
        let dom = Domain::uniform(2).unwrap();
        let hyps = [[2, 1], [2, 3], [3, 1], [3, 3]]
            .iter()
            .map(|v| Hypothesis::new(v.to_vec()))
            .collect();
        let sp = HypothesisSpace::new(3, hyps, None).unwrap();
        assert_eq!(natarajan_dimension(&sp, &dom, NatarajanGuard::default()).unwrap(), 2);
    }

    #[test]
    fn guard_trips() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 30, k: 2 }).unwrap();
        let err = natarajan_dimension(&sp, &dom, NatarajanGuard::default()).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded(_)));
    }
}
