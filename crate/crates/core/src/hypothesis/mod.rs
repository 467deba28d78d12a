//! Finite weighted domains and finite hypothesis spaces.
//!
//! Points are identified by their index `0..n` in the [`Domain`]. A
//! [`Hypothesis`] is a label vector over those points with labels in
//! `1..=k`. All probabilities are exact sums over the domain weights.

mod builtin;
mod cover;
mod natarajan;
mod text;

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

pub use builtin::{builtin_space, SpaceSpec};
pub use cover::epsilon_cover;
pub use natarajan::{natarajan_dimension, NatarajanGuard};
pub use text::{read_space, write_space};

/// A class label. Valid labels are `1..=k`.
pub type Label = u16;

/// Tolerance used when comparing sums of domain weights.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// The marginal distribution over a finite set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    weights: Vec<f64>,
    uniform: bool,
}

impl Domain {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("domain must contain at least one point"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid(format!("domain weight {w} is not a nonnegative real")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE.max(weights.len() as f64 * f64::EPSILON) {
            return Err(invalid(format!("domain weights sum to {total}, not 1")));
        }
        let uniform = weights.iter().all(|w| *w == weights[0]);
        Ok(Domain { weights, uniform })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("domain must contain at least one point"));
        }
        Ok(Domain {
            weights: vec![1.0 / n as f64; n],
            uniform: true,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Total weight of the points selected by `mask`.
    pub fn mass_of(&self, mask: &[bool]) -> f64 {
        if self.uniform {
            mask.iter().filter(|m| **m).count() as f64 * self.weights[0]
        } else {
            mask.iter()
                .zip(&self.weights)
                .filter(|(m, _)| **m)
                .map(|(_, w)| *w)
                .sum()
        }
    }
}

/// A classifier over a finite domain: one label per point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    labels: Arc<[Label]>,
}

impl std::fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hypothesis{:?}", &self.labels[..])
    }
}

impl Hypothesis {
    pub fn new(labels: Vec<Label>) -> Self {
        Hypothesis {
            labels: labels.into(),
        }
    }

    #[inline]
    pub fn label(&self, x: usize) -> Label {
        self.labels[x]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub(crate) fn check(&self, n: usize, k: Label) -> Result<()> {
        if self.labels.len() != n {
            return Err(Error::DomainMismatch {
                expected: n,
                actual: self.labels.len(),
            });
        }
        if let Some(&l) = self.labels.iter().find(|l| **l == 0 || **l > k) {
            return Err(Error::LabelOutOfRange {
                label: l as u32,
                k: k as u32,
            });
        }
        Ok(())
    }
}

/// A finite, duplicate-free, ordered set of hypotheses over one domain.
#[derive(Debug, Clone)]
pub struct HypothesisSpace {
    k: Label,
    n: usize,
    hypotheses: Vec<Hypothesis>,
    natarajan_dim: Option<usize>,
}

impl HypothesisSpace {
    pub fn new(k: Label, hypotheses: Vec<Hypothesis>, natarajan_dim: Option<usize>) -> Result<Self> {
        if k < 1 {
            return Err(invalid("label count k must be at least 1"));
        }
        let first = hypotheses
            .first()
            .ok_or_else(|| invalid("hypothesis space must be nonempty"))?;
        let n = first.len();
        let mut seen = HashSet::with_capacity(hypotheses.len());
        for h in &hypotheses {
            h.check(n, k)?;
            if !seen.insert(h.labels.clone()) {
                return Err(invalid(format!("duplicate hypothesis {h:?}")));
            }
        }
        Ok(HypothesisSpace {
            k,
            n,
            hypotheses,
            natarajan_dim,
        })
    }

    /// Builds a subspace from hypotheses already known to be valid and distinct.
    pub(crate) fn from_parts(
        k: Label,
        n: usize,
        hypotheses: Vec<Hypothesis>,
        natarajan_dim: Option<usize>,
    ) -> Self {
        debug_assert!(!hypotheses.is_empty());
        HypothesisSpace {
            k,
            n,
            hypotheses,
            natarajan_dim,
        }
    }

    pub fn k(&self) -> Label {
        self.k
    }

    /// Number of domain points every hypothesis labels.
    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn natarajan_dim(&self) -> Option<usize> {
        self.natarajan_dim
    }

    pub fn with_natarajan_dim(mut self, d: usize) -> Self {
        self.natarajan_dim = Some(d);
        self
    }

    pub fn subspace(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(invalid("subspace must be nonempty"));
        }
        let mut seen = HashSet::new();
        let mut hyps = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(invalid(format!("hypothesis index {i} out of range")));
            }
            if seen.insert(i) {
                hyps.push(self.hypotheses[i].clone());
            }
        }
        Ok(Self::from_parts(self.k, self.n, hyps, self.natarajan_dim))
    }

    pub fn check_domain(&self, dom: &Domain) -> Result<()> {
        if dom.len() != self.n {
            return Err(Error::DomainMismatch {
                expected: self.n,
                actual: dom.len(),
            });
        }
        Ok(())
    }
}

/// Labeled examples as (stream position, label) pairs with unique positions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledSample {
    entries: Vec<(usize, Label)>,
}

impl LabeledSample {
    pub fn new(entries: Vec<(usize, Label)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (p, _) in &entries {
            if !seen.insert(*p) {
                return Err(Error::DuplicatePosition(*p));
            }
        }
        Ok(LabeledSample { entries })
    }

    pub(crate) fn from_unique(entries: Vec<(usize, Label)>) -> Self {
        LabeledSample { entries }
    }

    pub fn entries(&self) -> &[(usize, Label)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, Label)> {
        self.entries.iter()
    }
}

/// Fraction of `sample` entries on which `h` disagrees with the recorded label.
///
/// `resolve` maps a stream position to its domain point.
pub fn empirical_error<F>(h: &Hypothesis, sample: &LabeledSample, resolve: F) -> Result<f64>
where
    F: Fn(usize) -> Option<usize>,
{
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut wrong = 0usize;
    for &(pos, y) in sample.iter() {
        let x = resolve(pos).ok_or(Error::PositionOutOfBounds {
            position: pos,
            len: 0,
        })?;
        if x >= h.len() {
            return Err(Error::DomainMismatch {
                expected: h.len(),
                actual: x + 1,
            });
        }
        if h.label(x) != y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / sample.len() as f64)
}

/// Probability mass of the points where `h` and `g` disagree.
pub fn class_distance(h: &Hypothesis, g: &Hypothesis, dom: &Domain) -> Result<f64> {
    for f in [h, g] {
        if f.len() != dom.len() {
            return Err(Error::DomainMismatch {
                expected: dom.len(),
                actual: f.len(),
            });
        }
    }
    Ok(distance(h.labels(), g.labels(), dom))
}

#[inline]
pub(crate) fn disagreement_count(a: &[Label], b: &[Label]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub(crate) fn distance(a: &[Label], b: &[Label], dom: &Domain) -> f64 {
    if dom.is_uniform() {
        disagreement_count(a, b) as f64 * dom.weight(0)
    } else {
        a.iter()
            .zip(b)
            .zip(dom.weights())
            .map(|((x, y), w)| if x != y { *w } else { 0.0 })
            .sum()
    }
}

/// Most frequent label at `x` among `hyps`; ties go to the smallest label.
pub fn plurality_vote(hyps: &[Hypothesis], k: Label, x: usize) -> Label {
    let mut counts = vec![0usize; k as usize + 1];
    for h in hyps {
        counts[h.label(x) as usize] += 1;
    }
    argmax_label(&counts)
}

/// The plurality-vote classifier of `hyps` evaluated at every domain point.
pub fn plurality_classifier(hyps: &[Hypothesis], k: Label) -> Hypothesis {
    assert!(!hyps.is_empty(), "plurality vote of an empty set");
    let n = hyps[0].len();
    let k = k as usize;
    let mut counts = vec![0u32; n * (k + 1)];
    for h in hyps {
        for (x, &l) in h.labels().iter().enumerate() {
            counts[x * (k + 1) + l as usize] += 1;
        }
    }
    let labels = counts.chunks(k + 1).map(argmax_label).collect();
    Hypothesis::new(labels)
}

fn argmax_label<T: Copy + Ord + Default>(counts: &[T]) -> Label {
    let mut best = 1usize;
    for y in 2..counts.len() {
        if counts[y] > counts[best] {
            best = y;
        }
    }
    best as Label
}
