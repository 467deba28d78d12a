//! Answering class-conditional queries with label requests, and the hard
//! agnostic instance run against both oracle kinds.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, HypothesisSpace, Label};
use crate::oracle::{
    agnostic_hard, true_error, validate_set, AnswerPolicy, CcqOracle, CcqResponse, DataSet, DirectOracle, GroundTruth,
    HardInstance, QueryLedger, QuerySet,
};
use crate::seed::derive;

/// Keeps a domain point in the candidate set of a query for the given label.
pub type Restriction = Box<dyn Fn(Label, usize) -> bool + Send>;

/// Counts specific to the simulated oracle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReductionLedger {
    pub ccq_answered: u64,
    pub label_requests_spent: u64,
    /// Fresh label requests spent on each query, in order.
    pub trace: Vec<u64>,
}

/// A class-conditional oracle that only ever looks at labels it has requested.
///
/// Each query visits its candidate positions in uniformly random order,
/// requesting labels until one matches. Labels already requested are reused
/// without cost.
pub struct ReductionOracle<'a> {
    ds: &'a DataSet,
    rng: ChaCha8Rng,
    restriction: Option<Restriction>,
    known: HashMap<usize, Label>,
    ledger: QueryLedger,
    stats: ReductionLedger,
    answers: Vec<usize>,
}

impl<'a> ReductionOracle<'a> {
    pub fn new(ds: &'a DataSet, seed: u64) -> Self {
        ReductionOracle {
            ds,
            rng: ChaCha8Rng::seed_from_u64(seed),
            restriction: None,
            known: HashMap::new(),
            ledger: QueryLedger::new(),
            stats: ReductionLedger::default(),
            answers: Vec::new(),
        }
    }

    /// Drops candidates the filter rejects. Answers stay truthful only if no
    /// dropped point can carry the queried label.
    pub fn with_restriction(mut self, restriction: Restriction) -> Self {
        self.restriction = Some(restriction);
        self
    }

    pub fn stats(&self) -> &ReductionLedger {
        &self.stats
    }

    /// Positions returned by the queries that found a witness, in order.
    pub fn answers(&self) -> &[usize] {
        &self.answers
    }

    fn reveal(&mut self, pos: usize) -> (Label, bool) {
        if let Some(&y) = self.known.get(&pos) {
            return (y, false);
        }
        self.ledger.record_label_request(pos);
        let y = self.ds.reveal_label(pos);
        self.known.insert(pos, y);
        (y, true)
    }
}

/// Keeps only points where `label` has positive probability under `gt`.
pub fn support_restriction(gt: &GroundTruth) -> Restriction {
    let gt = gt.clone();
    Box::new(move |label, x| gt.prob(x, label) > 0.0)
}

impl CcqOracle for ReductionOracle<'_> {
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
        let k = self.num_labels();
        if label == 0 || label > k {
            return Err(Error::LabelOutOfRange {
                label: label as u32,
                k: k as u32,
            });
        }
        validate_set(set, self.ds.len())?;
        self.ledger.record_ccq();
        let mut cand = set.to_vec();
        if let Some(keep) = &self.restriction {
            let ds = self.ds;
            cand.retain(|&p| keep(label, ds.point(p)));
        }
        let mut spent = 0u64;
        let mut found = None;
        for j in 0..cand.len() {
            let r = self.rng.random_range(j..cand.len());
            cand.swap(j, r);
            let (y, fresh) = self.reveal(cand[j]);
            spent += u64::from(fresh);
            if y == label {
                found = Some(cand[j]);
                break;
            }
        }
        self.stats.ccq_answered += 1;
        self.stats.label_requests_spent += spent;
        self.stats.trace.push(spent);
        Ok(match found {
            Some(position) => {
                self.answers.push(position);
                CcqResponse::Found { position, label }
            }
            None => CcqResponse::NoneSuch,
        })
    }

    fn request_label(&mut self, pos: usize) -> Result<Label> {
        self.ds.check(pos)?;
        let (y, fresh) = self.reveal(pos);
        self.stats.label_requests_spent += u64::from(fresh);
        Ok(y)
    }

    fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    fn set_phase(&mut self, phase: &str) {
        self.ledger.set_phase(phase);
    }
}

/// `(2/alpha)(k + 4 ln(1/delta))`, a `1 - delta` bound on a sum of `k`
/// independent geometric variables with success probability at least `alpha`.
pub fn geometric_sum_bound(k: u64, alpha: f64, delta: f64) -> Result<f64> {
    if k == 0 || !(alpha > 0.0 && alpha <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("need k >= 1, alpha in (0,1], delta in (0,1), got {k}, {alpha}, {delta}")));
    }
    Ok(2.0 / alpha * (k as f64 + 4.0 * (1.0 / delta).ln()))
}

/// One learner run against one oracle backend.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendRun {
    pub error: f64,
    pub ccq: u64,
    pub label_requests: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardTrial {
    pub instance: HardInstance,
    pub best_error: f64,
    pub direct: BackendRun,
    pub reduction: BackendRun,
    /// Label requests the simulated oracle spent per query.
    pub trace: Vec<u64>,
}

/// Runs `learner` on the hard agnostic instance twice: once against the
/// simulated oracle and once against a direct oracle replaying the same
/// witnesses, so a deterministic learner sees identical answers.
///
/// The learner gets the oracle, the instance's space and an rng seeded the
/// same way for both runs.
pub fn hard_instance_trial<F>(
    d: usize,
    eta: f64,
    eps: f64,
    signs: &[i8],
    stream_len: usize,
    seed: u64,
    mut learner: F,
) -> Result<HardTrial>
where
    F: FnMut(&mut dyn CcqOracle, &HypothesisSpace, &mut ChaCha8Rng) -> Result<Hypothesis>,
{
    let instance = HardInstance::new(eta, eps)?;
    if !(2.0 * eps <= eta && eta < 0.25) {
        log::warn!("eta={eta}, eps={eps} is outside 2 eps <= eta < 1/4; the lower bound does not apply");
    }
    let (gt, space) = agnostic_hard(d, eta, eps, signs)?;
    let best_error = gt.best_in(&space).1;
    let ds = DataSet::draw(gt.clone(), stream_len, derive(seed, &[0]))?;
    let learner_seed = derive(seed, &[1]);

    let mut red = ReductionOracle::new(&ds, derive(seed, &[3])).with_restriction(support_restriction(&gt));
    let h = learner(&mut red, &space, &mut ChaCha8Rng::seed_from_u64(learner_seed))?;
    let reduction = BackendRun {
        error: true_error(&h, &gt)?,
        ccq: red.ledger().ccq_count(),
        label_requests: red.stats().label_requests_spent,
    };

    let mut replay: VecDeque<usize> = red.answers().iter().copied().collect();
    let policy = AnswerPolicy::Custom(Box::new(move |_, witnesses: &[usize]| {
        replay
            .pop_front()
            .and_then(|p| witnesses.binary_search(&p).ok())
            .unwrap_or(0)
    }));
    let mut direct_oracle = DirectOracle::with_policy(&ds, policy, 0);
    let h = learner(&mut direct_oracle, &space, &mut ChaCha8Rng::seed_from_u64(learner_seed))?;
    let direct = BackendRun {
        error: true_error(&h, &gt)?,
        ccq: direct_oracle.ledger().ccq_count(),
        label_requests: direct_oracle.ledger().label_request_count(),
    };
    Ok(HardTrial {
        instance,
        best_error,
        direct,
        reduction,
        trace: red.stats().trace.clone(),
    })
}
