use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{noise_label, space_label, Cell, LearnerSpec, PolicySpec};
use crate::agnostic::{AdaptiveAgnostic, AgnosticLearner};
use crate::bounded::{adaptive_alpha, BatchLearner, BoundedDriver, DisagreementConfig, DisagreementLearner};
use crate::error::{Failure, Result};
use crate::hypothesis::{builtin_space, Domain, Hypothesis, HypothesisSpace};
use crate::oracle::{build_distribution, true_error, AnswerPolicy, CcqOracle, DataSet, DirectOracle};
use crate::seed::derive;
use crate::splitting::{Labeling, SplittingLearner};

/// Stream length for learners that consume the stream as they go.
pub const DEFAULT_STREAM: usize = 1 << 24;

/// The outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub cell: usize,
    pub trial: usize,
    pub seed: u64,
    pub algorithm: String,
    pub space: String,
    pub noise: String,
    pub noise_level: f64,
    pub eps: f64,
    pub delta: f64,
    pub d: usize,
    pub k: u16,
    pub target_index: usize,
    /// Error of the best hypothesis in the space.
    pub noise_rate: f64,
    pub error: Option<f64>,
    pub success: bool,
    pub ccq_count: u64,
    pub label_request_count: u64,
    pub wall_ms: Option<f64>,
    pub failure: Option<String>,
}

enum Prepared {
    Agnostic { learner: AgnosticLearner, beta: f64 },
    Adaptive(AdaptiveAgnostic),
    Bounded { driver: BoundedDriver, alpha: f64, dis: DisagreementConfig },
    AdaptiveAlpha { driver: BoundedDriver, dis: DisagreementConfig },
    Splitting { learner: SplittingLearner, driver: Option<BoundedDriver> },
    Inject(String),
}

/// A cell with its covers and learners built once, ready for many trials.
pub struct CellRunner {
    cell: Cell,
    dom: Domain,
    space: HypothesisSpace,
    stream_len: usize,
    prepared: Prepared,
}

impl CellRunner {
    pub fn new(cell: &Cell) -> Result<Self> {
        let (dom, space) = builtin_space(&cell.space)?;
        let level = cell.noise.level();
        let (eps, delta) = (cell.eps, cell.delta);
        let (prepared, needed) = match &cell.learner {
            LearnerSpec::Agnostic { beta, config } => {
                let beta = beta.unwrap_or(level);
                let learner = AgnosticLearner::new(&space, &dom, eps, *config)?;
                let needed = learner.pool_size(beta, delta);
                (Prepared::Agnostic { learner, beta }, needed)
            }
            LearnerSpec::AdaptiveAgnostic { config, adaptive } => {
                let a = AdaptiveAgnostic::new(&space, &dom, eps, *config, *adaptive)?;
                let needed = a.required_stream(delta);
                (Prepared::Adaptive(a), needed)
            }
            LearnerSpec::Bounded {
                alpha,
                bounded,
                disagreement,
            } => {
                let driver = BoundedDriver::new(&space, &dom, eps, *bounded)?;
                let prepared = Prepared::Bounded {
                    driver,
                    alpha: alpha.unwrap_or(level),
                    dis: *disagreement,
                };
                (prepared, DEFAULT_STREAM)
            }
            LearnerSpec::AdaptiveAlpha { bounded, disagreement } => {
                let driver = BoundedDriver::new(&space, &dom, eps, *bounded)?;
                (Prepared::AdaptiveAlpha { driver, dis: *disagreement }, DEFAULT_STREAM)
            }
            LearnerSpec::Splitting {
                tau,
                alpha,
                ccq,
                config,
                bounded,
            } => {
                let learner = SplittingLearner::new(&space, &dom, eps, *tau, alpha.unwrap_or(level), delta, *config)?;
                let driver = if *ccq {
                    Some(BoundedDriver::new(&space, &dom, eps, *bounded)?)
                } else {
                    None
                };
                (Prepared::Splitting { learner, driver }, DEFAULT_STREAM)
            }
            LearnerSpec::Inject { message } => (Prepared::Inject(message.clone()), 1),
        };
        Ok(CellRunner {
            cell: cell.clone(),
            dom,
            space,
            stream_len: cell.stream_len.unwrap_or(needed),
            prepared,
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn stream_len(&self) -> usize {
        self.stream_len
    }

    /// Runs one trial. Learner failures become unsuccessful records; other
    /// errors are returned.
    ///
    /// Sub-seeds: data 0, learner 1, target 2, answer policy 3, flip profile 4.
    pub fn run_trial(&self, trial: usize, seed: u64) -> Result<TrialRecord> {
        let start = Instant::now();
        let cell = &self.cell;
        let k = self.space.k();
        let target_index = match cell.target {
            Some(i) => i,
            None => ChaCha8Rng::seed_from_u64(derive(seed, &[2])).random_range(0..self.space.len()),
        };
        let target = self.space.get(target_index).clone();
        let gt = build_distribution(&cell.noise, &self.dom, &target, k, derive(seed, &[4]))?;
        let (_, noise_rate) = gt.best_in(&self.space);
        let ds = DataSet::draw(gt.clone(), self.stream_len, derive(seed, &[0]))?;
        let policy = match cell.policy {
            PolicySpec::FirstIndex => AnswerPolicy::FirstIndex,
            PolicySpec::UniformRandom => AnswerPolicy::UniformRandom,
        };
        let mut oracle = DirectOracle::with_policy(&ds, policy, derive(seed, &[3]));
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &[1]));
        let result = self.learn(&mut oracle, &mut rng);
        let (error, failure) = match result {
            Ok(h) => (Some(true_error(&h, &gt)?), None),
            Err(e) if e.is_failure() => (None, Some(e.to_string())),
            Err(e) => return Err(e),
        };
        Ok(TrialRecord {
            cell: cell.index,
            trial,
            seed,
            algorithm: cell.learner.name().to_owned(),
            space: space_label(&cell.space),
            noise: noise_label(&cell.noise).to_owned(),
            noise_level: cell.noise.level(),
            eps: cell.eps,
            delta: cell.delta,
            d: self.space.natarajan_dim().unwrap_or(0),
            k,
            target_index,
            noise_rate,
            error,
            success: error.is_some_and(|e| e <= noise_rate + cell.eps + 1e-12),
            ccq_count: oracle.ledger().ccq_count(),
            label_request_count: oracle.ledger().label_request_count(),
            wall_ms: cell.wall_time.then(|| start.elapsed().as_secs_f64() * 1e3),
            failure,
        })
    }

    fn learn(&self, oracle: &mut dyn CcqOracle, rng: &mut ChaCha8Rng) -> Result<Hypothesis> {
        let delta = self.cell.delta;
        match &self.prepared {
            Prepared::Agnostic { learner, beta } => Ok(learner.learn(oracle, *beta, delta, rng)?.hypothesis),
            Prepared::Adaptive(a) => Ok(a.learn(oracle, delta, rng)?.hypothesis),
            Prepared::Bounded { driver, alpha, dis } => {
                let mut l = DisagreementLearner::new(&self.space, &self.dom, self.cell.eps, delta, *alpha, *dis)?;
                Ok(driver.run(oracle, &mut l, *alpha, delta, rng)?.hypothesis)
            }
            Prepared::AdaptiveAlpha { driver, dis } => {
                let make = |a: f64| -> Result<Box<dyn BatchLearner>> {
                    Ok(Box::new(DisagreementLearner::new(&self.space, &self.dom, self.cell.eps, delta, a, *dis)?))
                };
                Ok(adaptive_alpha(driver, oracle, make, delta, rng)?.outcome.hypothesis)
            }
            Prepared::Splitting { learner, driver } => {
                let labeling = match driver {
                    Some(driver) => Labeling::Ccq { driver, delta },
                    None => Labeling::Requests,
                };
                Ok(learner.run(oracle, labeling, rng)?.hypothesis)
            }
            Prepared::Inject(message) => Err(Failure::Injected(message.clone()).into()),
        }
    }
}

/// Builds the cell and runs a single trial.
pub fn run_trial(cell: &Cell, trial: usize, seed: u64) -> Result<TrialRecord> {
    CellRunner::new(cell)?.run_trial(trial, seed)
}

/// The seed of trial `trial` in cell `cell` under `base`.
pub fn trial_seed(base: u64, cell: usize, trial: usize) -> u64 {
    derive(base, &[cell as u64, trial as u64])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ExperimentConfig;

    fn cfg(learner: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(&format!(
            "schema_version = 1\neps = 0.1\ndelta = 0.1\n[space]\nkind = \"thresholds\"\ngrid = 50\n[noise]\nkind = \"realizable\"\n[learner]\n{learner}\n"
        ))
        .unwrap()
    }

    #[test]
    fn repeated_seed_gives_same_record() {
        let c = cfg("algorithm = \"agnostic\"").base_cell();
        let a = run_trial(&c, 0, 11).unwrap();
        let b = run_trial(&c, 0, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.success);
        assert!(a.ccq_count > 0);
    }

    #[test]
    fn injected_failure_is_recorded() {
        let c = cfg("algorithm = \"inject\"\nmessage = \"boom\"").base_cell();
        let r = run_trial(&c, 3, 5).unwrap();
        assert!(!r.success);
        assert_eq!(r.error, None);
        assert!(r.failure.unwrap().contains("boom"));
    }
}
