use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agnostic::{AdaptiveConfig, AgnosticConfig};
use crate::bounded::{BoundedConfig, DisagreementConfig};
use crate::error::{Error, Result};
use crate::hypothesis::{Label, SpaceSpec};
use crate::oracle::NoiseSpec;
use crate::splitting::SplittingConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Which learner a cell runs, with its constant overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum LearnerSpec {
    /// Known noise bound; `beta` defaults to the cell's noise level.
    Agnostic {
        beta: Option<f64>,
        #[serde(default)]
        config: AgnosticConfig,
    },
    AdaptiveAgnostic {
        #[serde(default)]
        config: AgnosticConfig,
        #[serde(default)]
        adaptive: AdaptiveConfig,
    },
    /// Batch labeling for the disagreement learner with a known `alpha`.
    Bounded {
        alpha: Option<f64>,
        #[serde(default)]
        bounded: BoundedConfig,
        #[serde(default)]
        disagreement: DisagreementConfig,
    },
    AdaptiveAlpha {
        #[serde(default)]
        bounded: BoundedConfig,
        #[serde(default)]
        disagreement: DisagreementConfig,
    },
    /// The splitting learner; `ccq` labels its batches through the bounded driver.
    Splitting {
        tau: f64,
        alpha: Option<f64>,
        #[serde(default)]
        ccq: bool,
        #[serde(default)]
        config: SplittingConfig,
        #[serde(default)]
        bounded: BoundedConfig,
    },
    /// Fails every trial; exercises the failure path.
    Inject { message: String },
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Agnostic { .. } => "agnostic",
            LearnerSpec::AdaptiveAgnostic { .. } => "adaptive_agnostic",
            LearnerSpec::Bounded { .. } => "bounded",
            LearnerSpec::AdaptiveAlpha { .. } => "adaptive_alpha",
            LearnerSpec::Splitting { .. } => "splitting",
            LearnerSpec::Inject { .. } => "inject",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySpec {
    #[default]
    FirstIndex,
    UniformRandom,
}

/// Axes of a sweep; an absent axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub eps: Option<Vec<f64>>,
    /// Noise level; a realizable base turns into label noise at positive levels.
    pub noise: Option<Vec<f64>>,
    /// Dimension of a shattered space.
    pub d: Option<Vec<usize>>,
    pub k: Option<Vec<Label>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub space: SpaceSpec,
    pub noise: NoiseSpec,
    pub learner: LearnerSpec,
    pub eps: f64,
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Stream length; by default the learner's requirement.
    pub stream_len: Option<usize>,
    /// Fixed target index; by default drawn per trial.
    pub target: Option<usize>,
    #[serde(default)]
    pub policy: PolicySpec,
    /// Adds wall-clock milliseconds to trial rows, which makes output nondeterministic.
    #[serde(default)]
    pub wall_time: bool,
    pub sweep: Option<SweepAxes>,
}

fn default_trials() -> usize {
    1
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub space: SpaceSpec,
    pub noise: NoiseSpec,
    pub learner: LearnerSpec,
    pub eps: f64,
    pub delta: f64,
    pub stream_len: Option<usize>,
    pub target: Option<usize>,
    pub policy: PolicySpec,
    pub wall_time: bool,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if let Some(axes) = &self.sweep {
            let named = [
                ("eps", axes.eps.as_ref().map(Vec::len)),
                ("noise", axes.noise.as_ref().map(Vec::len)),
                ("d", axes.d.as_ref().map(Vec::len)),
                ("k", axes.k.as_ref().map(Vec::len)),
            ];
            if let Some((name, _)) = named.iter().find(|(_, n)| *n == Some(0)) {
                return Err(config_err(format!(
                    "sweep axis `{name}` is empty; list at least one value or remove the axis"
                )));
            }
        }
        check_cell(&self.base_cell())?;
        for cell in self.cells()? {
            check_cell(&cell)?;
        }
        Ok(())
    }

    /// The cell with no sweep axes applied.
    pub fn base_cell(&self) -> Cell {
        Cell {
            index: 0,
            space: self.space.clone(),
            noise: self.noise.clone(),
            learner: self.learner.clone(),
            eps: self.eps,
            delta: self.delta,
            stream_len: self.stream_len,
            target: self.target,
            policy: self.policy,
            wall_time: self.wall_time,
        }
    }

    /// The Cartesian product of the sweep axes, in `eps`, `noise`, `d`, `k` order.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let base = self.base_cell();
        let axes = self.sweep.clone().unwrap_or_default();
        let epss = axes.eps.unwrap_or_else(|| vec![self.eps]);
        let levels: Vec<Option<f64>> = axes.noise.map_or(vec![None], |v| v.into_iter().map(Some).collect());
        let ds: Vec<Option<usize>> = axes.d.map_or(vec![None], |v| v.into_iter().map(Some).collect());
        let ks: Vec<Option<Label>> = axes.k.map_or(vec![None], |v| v.into_iter().map(Some).collect());
        let mut cells = Vec::new();
        for &eps in &epss {
            for &level in &levels {
                for &d in &ds {
                    for &k in &ks {
                        let mut c = base.clone();
                        c.index = cells.len();
                        c.eps = eps;
                        if let Some(level) = level {
                            c.noise = c.noise.with_level(level);
                        }
                        if let Some(d) = d {
                            c.space = match c.space {
                                SpaceSpec::Shattered { k, .. } => SpaceSpec::Shattered { d, k },
                                _ => return Err(config_err("the `d` axis needs a shattered space")),
                            };
                        }
                        if let Some(k) = k {
                            c.space = match c.space {
                                SpaceSpec::Thresholds { grid, .. } => SpaceSpec::Thresholds { grid, k },
                                SpaceSpec::Intervals { grid, .. } => SpaceSpec::Intervals { grid, k },
                                SpaceSpec::Shattered { d, .. } => SpaceSpec::Shattered { d, k },
                                SpaceSpec::Explicit { .. } => return Err(config_err("the `k` axis needs a built-in space")),
                            };
                        }
                        cells.push(c);
                    }
                }
            }
        }
        Ok(cells)
    }
}

fn check_cell(c: &Cell) -> Result<()> {
    if !(c.eps > 0.0 && c.eps < 1.0) || !(c.delta > 0.0 && c.delta < 1.0) {
        return Err(config_err(format!("eps and delta must lie in (0,1), got {} and {}", c.eps, c.delta)));
    }
    let level = c.noise.level();
    if !(0.0..0.5).contains(&level) {
        return Err(config_err(format!("noise level {level} outside [0, 1/2)")));
    }
    if let LearnerSpec::Splitting { tau, .. } = c.learner {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(config_err(format!("tau {tau} not in (0,1)")));
        }
    }
    Ok(())
}

/// `kind:size:k` for built-in spaces, `file:path` otherwise.
pub fn space_label(spec: &SpaceSpec) -> String {
    let mut s = String::new();
    let _ = match spec {
        SpaceSpec::Thresholds { grid, k } => write!(s, "thresholds:{grid}:{k}"),
        SpaceSpec::Intervals { grid, k } => write!(s, "intervals:{grid}:{k}"),
        SpaceSpec::Shattered { d, k } => write!(s, "shattered:{d}:{k}"),
        SpaceSpec::Explicit { path } => write!(s, "file:{}", path.display()),
    };
    s
}

pub fn noise_label(spec: &NoiseSpec) -> &'static str {
    match spec {
        NoiseSpec::Realizable => "realizable",
        NoiseSpec::Rcn { .. } => "rcn",
        NoiseSpec::Bounded { .. } => "bounded",
    }
}
