//! Ground truth, drawn data, and the query oracles learners talk to.

mod dataset;
mod distribution;
mod ledger;
mod positions;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::hypothesis::Label;

pub use dataset::{DataSet, PREFIX_LIMIT};
pub use distribution::{
    agnostic_hard, build_distribution, true_error, FlipProfile, GroundTruth, HardInstance, NoiseSpec,
};
pub use ledger::{PhaseCount, QueryLedger};
pub use positions::{PositionBits, QuerySet};

/// Answer to a class-conditional query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcqResponse {
    Found { position: usize, label: Label },
    NoneSuch,
}

/// A class-conditional query with an owned position list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcqQuery {
    pub label: Label,
    pub positions: Vec<usize>,
}

/// What learners see: the drawn points, and queries that reveal labels.
pub trait CcqOracle {
    fn stream_len(&self) -> usize;

    /// Domain point at stream position `pos`. Panics past the stream end.
    fn point(&self, pos: usize) -> usize;

    fn num_labels(&self) -> Label;

    /// Returns a position in `set` whose label is `label`, or `NoneSuch`.
    fn class_conditional(&mut self, label: Label, set: QuerySet<'_>) -> Result<CcqResponse>;

    /// Reveals the label at `pos`.
    fn request_label(&mut self, pos: usize) -> Result<Label>;

    fn ledger(&self) -> &QueryLedger;

    fn set_phase(&mut self, phase: &str);
}

/// Picks one witness from the sorted list of all witnesses.
pub type ChooseFn = Box<dyn FnMut(Label, &[usize]) -> usize + Send>;

/// How the oracle resolves "return an arbitrary witness".
pub enum AnswerPolicy {
    /// The lowest witness position.
    FirstIndex,
    /// A uniformly random witness.
    UniformRandom,
    /// Caller chooses by index into the ascending witness list.
    Custom(ChooseFn),
}

impl std::fmt::Debug for AnswerPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnswerPolicy::FirstIndex => f.write_str("FirstIndex"),
            AnswerPolicy::UniformRandom => f.write_str("UniformRandom"),
            AnswerPolicy::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Answers queries straight from the hidden labels of a [`DataSet`].
pub struct DirectOracle<'a> {
    ds: &'a DataSet,
    policy: AnswerPolicy,
    rng: ChaCha8Rng,
    ledger: QueryLedger,
    scratch: Vec<usize>,
}

impl<'a> DirectOracle<'a> {
    pub fn new(ds: &'a DataSet) -> Self {
        Self::with_policy(ds, AnswerPolicy::FirstIndex, 0)
    }

    /// `seed` drives the random policy only.
    pub fn with_policy(ds: &'a DataSet, policy: AnswerPolicy, seed: u64) -> Self {
        DirectOracle {
            ds,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ledger: QueryLedger::new(),
            scratch: Vec::new(),
        }
    }

    pub fn into_ledger(self) -> QueryLedger {
        self.ledger
    }

    pub fn answer(&mut self, q: &CcqQuery) -> Result<CcqResponse> {
        self.class_conditional(q.label, QuerySet::Positions(&q.positions))
    }

    fn check_label(&self, label: Label) -> Result<()> {
        let k = self.ds.ground_truth().k();
        if label == 0 || label > k {
            return Err(Error::LabelOutOfRange {
                label: label as u32,
                k: k as u32,
            });
        }
        Ok(())
    }

    fn first_witness(&self, label: Label, set: QuerySet<'_>) -> Option<usize> {
        match set {
            QuerySet::Positions(ps) => ps
                .iter()
                .copied()
                .filter(|&p| self.ds.reveal_label(p) == label)
                .min(),
            QuerySet::Bits(bits) => {
                let lb = self.ds.label_bits(label).words();
                let words = bits.words();
                let shared = words.len().min(lb.len());
                for i in 0..shared {
                    let w = words[i] & lb[i];
                    if w != 0 {
                        return Some(i * 64 + w.trailing_zeros() as usize);
                    }
                }
                // positions past the eager prefix
                let start = self.ds.prefix_len();
                bits.iter()
                    .skip_while(|&p| p < start)
                    .find(|&p| self.ds.reveal_label(p) == label)
            }
        }
    }

    fn all_witnesses(&mut self, label: Label, set: QuerySet<'_>) {
        self.scratch.clear();
        match set {
            QuerySet::Positions(ps) => self
                .scratch
                .extend(ps.iter().copied().filter(|&p| self.ds.reveal_label(p) == label)),
            QuerySet::Bits(bits) => self
                .scratch
                .extend(bits.iter().filter(|&p| self.ds.reveal_label(p) == label)),
        }
        self.scratch.sort_unstable();
    }
}

/// Rejects out-of-range and repeated positions.
pub(crate) fn validate_set(set: QuerySet<'_>, len: usize) -> Result<()> {
    match set {
        QuerySet::Positions(ps) => {
            if let Some(&p) = ps.iter().find(|&&p| p >= len) {
                return Err(Error::PositionOutOfBounds { position: p, len });
            }
            if !ps.windows(2).all(|w| w[0] < w[1]) {
                let mut sorted = ps.to_vec();
                sorted.sort_unstable();
                if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                    return Err(Error::DuplicatePosition(w[0]));
                }
            }
        }
        QuerySet::Bits(bits) => {
            if bits.universe() > len {
                if let Some(p) = bits.iter().find(|&p| p >= len) {
                    return Err(Error::PositionOutOfBounds { position: p, len });
                }
            }
        }
    }
    Ok(())
}

impl CcqOracle for DirectOracle<'_> {
    fn stream_len(&self) -> usize {
        self.ds.len()
    }

    fn point(&self, pos: usize) -> usize {
        self.ds.point(pos)
    }

    fn num_labels(&self) -> Label {
        self.ds.ground_truth().k()
    }

    fn class_conditional(&mut self, label: Label, set: QuerySet<'_>) -> Result<CcqResponse> {
        self.check_label(label)?;
        validate_set(set, self.ds.len())?;
        self.ledger.record_ccq();
        let position = match &mut self.policy {
            AnswerPolicy::FirstIndex => self.first_witness(label, set),
            AnswerPolicy::UniformRandom => {
                self.all_witnesses(label, set);
                (!self.scratch.is_empty()).then(|| self.scratch[self.rng.random_range(0..self.scratch.len())])
            }
            AnswerPolicy::Custom(_) => {
                self.all_witnesses(label, set);
                if self.scratch.is_empty() {
                    None
                } else {
                    let AnswerPolicy::Custom(f) = &mut self.policy else { unreachable!() };
                    let i = f(label, &self.scratch);
                    let p = *self
                        .scratch
                        .get(i)
                        .ok_or_else(|| invalid(format!("answer policy chose witness {i} of {}", self.scratch.len())))?;
                    Some(p)
                }
            }
        };
        Ok(match position {
            Some(position) => CcqResponse::Found { position, label },
            None => CcqResponse::NoneSuch,
        })
    }

    fn request_label(&mut self, pos: usize) -> Result<Label> {
        self.ds.check(pos)?;
        self.ledger.record_label_request(pos);
        Ok(self.ds.reveal_label(pos))
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    fn set_phase(&mut self, phase: &str) {
        self.ledger.set_phase(phase);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{Domain, Hypothesis};
    use rand::seq::index::sample;

    fn noisy_ds(n: usize, seed: u64) -> DataSet {
        let dom = Domain::uniform(20).unwrap();
        let h = Hypothesis::new((0..20).map(|x| (x % 3) as Label + 1).collect());
        DataSet::draw(GroundTruth::rcn(dom, &h, 3, 0.3).unwrap(), n, seed).unwrap()
    }

    #[test]
    fn none_and_unique_witness() {
        let ds = noisy_ds(50, 1);
        let mut o = DirectOracle::new(&ds);
        let ones: Vec<usize> = (0..50).filter(|&p| ds.reveal_label(p) == 1).collect();
        assert_eq!(o.answer(&CcqQuery { label: 2, positions: ones.clone() }).unwrap(), CcqResponse::NoneSuch);
        let others: Vec<usize> = (0..50).filter(|&p| ds.reveal_label(p) != 1).collect();
        let mut set = vec![ones[0]];
        set.extend(&others);
        set.sort();
        assert_eq!(
            o.answer(&CcqQuery { label: 1, positions: set }).unwrap(),
            CcqResponse::Found { position: ones[0], label: 1 }
        );
        assert_eq!(o.ledger().ccq_count(), 2);
    }

    #[test]
    fn first_index_matches_scan_for_both_set_kinds() {
        let ds = noisy_ds(3000, 2);
        let mut o = DirectOracle::new(&ds);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for q in 0..300 {
            let size = rng.random_range(1..200);
            let mut ps = sample(&mut rng, 3000, size).into_vec();
            if q % 2 == 0 {
                ps.sort();
            }
            let label = rng.random_range(1..=3);
            let want = ps.iter().copied().filter(|&p| ds.reveal_label(p) == label).min();
            let bits = PositionBits::from_positions(3000, &ps);
            for set in [QuerySet::Positions(&ps), QuerySet::Bits(&bits)] {
                let got = o.class_conditional(label, set).unwrap();
                match want {
                    Some(p) => assert_eq!(got, CcqResponse::Found { position: p, label }),
                    None => assert_eq!(got, CcqResponse::NoneSuch),
                }
            }
        }
        assert_eq!(o.ledger().ccq_count(), 600);
    }

    #[test]
    fn random_and_custom_policies_are_truthful() {
        let ds = noisy_ds(500, 3);
        let policies = [
            AnswerPolicy::UniformRandom,
            AnswerPolicy::Custom(Box::new(|_, w: &[usize]| w.len() - 1)),
        ];
        for policy in policies {
            let mut o = DirectOracle::with_policy(&ds, policy, 4);
            let all: Vec<usize> = (0..500).collect();
            for label in 1..=3 {
                match o.class_conditional(label, QuerySet::Positions(&all)).unwrap() {
                    CcqResponse::Found { position, label: l } => {
                        assert_eq!(l, label);
                        assert_eq!(ds.reveal_label(position), label);
                    }
                    CcqResponse::NoneSuch => panic!("witnesses exist"),
                }
            }
        }
    }

    #[test]
    fn invalid_queries_are_not_counted() {
        let ds = noisy_ds(10, 4);
        let mut o = DirectOracle::new(&ds);
        assert!(o.class_conditional(1, QuerySet::Positions(&[3, 10])).is_err());
        assert!(o.class_conditional(1, QuerySet::Positions(&[4, 2, 4])).is_err());
        assert!(o.class_conditional(4, QuerySet::Positions(&[1])).is_err());
        assert!(o.request_label(10).is_err());
        assert_eq!(o.ledger().ccq_count(), 0);
        assert_eq!(o.ledger().label_request_count(), 0);
    }

    #[test]
    fn label_requests_dedup() {
        let ds = noisy_ds(200, 5);
        let mut o = DirectOracle::new(&ds);
        assert_eq!(o.request_label(7).unwrap(), ds.reveal_label(7));
        o.request_label(7).unwrap();
        assert_eq!(o.ledger().label_request_count(), 1);
        for p in 100..200 {
            o.request_label(p).unwrap();
        }
        assert_eq!(o.ledger().label_request_count(), 101);
    }
}
