use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{read_space, Domain, Hypothesis, HypothesisSpace, Label};
use crate::error::{invalid, Error, Result};

const MAX_SHATTERED: usize = 1 << 22;

/// Which built-in hypothesis space to instantiate.
///
/// Thresholds label a point `1` below the threshold and `2` at or above it;
/// intervals label `2` inside a half-open grid interval and `1` elsewhere. `k`
/// is the label alphabet size, so with `k > 2` noise can land on labels no
/// hypothesis predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    Thresholds {
        grid: usize,
        #[serde(default = "default_k")]
        k: Label,
    },
    Intervals {
        grid: usize,
        #[serde(default = "default_k")]
        k: Label,
    },
    Shattered {
        d: usize,
        #[serde(default = "default_k")]
        k: Label,
    },
    Explicit {
        path: PathBuf,
    },
}

fn default_k() -> Label {
    2
}

impl FromStr for SpaceSpec {
    type Err = Error;

    /// `thresholds:<grid>[:k]`, `intervals:<grid>[:k]`, `shattered:<d>[:k]` or `file:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("space spec `{s}` has no `:`")))?;
        if kind == "file" {
            return Ok(SpaceSpec::Explicit { path: rest.into() });
        }
        let nums: Vec<usize> = rest
            .split(':')
            .map(|t| {
                t.parse()
                    .map_err(|_| invalid(format!("bad number `{t}` in space spec `{s}`")))
            })
            .collect::<Result<_>>()?;
        let (size, k) = match nums[..] {
            [a] => (a, 2),
            [a, b] => (a, b),
            _ => return Err(invalid(format!("space spec `{s}` has too many fields"))),
        };
        let k = Label::try_from(k).map_err(|_| invalid("k too large"))?;
        match kind {
            "thresholds" => Ok(SpaceSpec::Thresholds { grid: size, k }),
            "intervals" => Ok(SpaceSpec::Intervals { grid: size, k }),
            "shattered" => Ok(SpaceSpec::Shattered { d: size, k }),
            other => Err(invalid(format!("unknown space kind `{other}`"))),
        }
    }
}

pub fn builtin_space(spec: &SpaceSpec) -> Result<(Domain, HypothesisSpace)> {
    match *spec {
        SpaceSpec::Thresholds { grid, k } => {
            check(grid, k)?;
            let hyps = (0..=grid)
                .map(|t| Hypothesis::new((0..grid).map(|x| if x < t { 1 } else { 2 }).collect()))
                .collect();
            Ok((Domain::uniform(grid)?, HypothesisSpace::from_parts(k, grid, hyps, Some(1))))
        }
        SpaceSpec::Intervals { grid, k } => {
            check(grid, k)?;
            let mut hyps = Vec::with_capacity(grid * (grid + 1) / 2 + 1);
            hyps.push(Hypothesis::new(vec![1; grid]));
            for a in 0..grid {
                for b in a + 1..=grid {
                    hyps.push(Hypothesis::new(
                        (0..grid).map(|x| if a <= x && x < b { 2 } else { 1 }).collect(),
                    ));
                }
            }
            let dim = grid.min(2);
            Ok((Domain::uniform(grid)?, HypothesisSpace::from_parts(k, grid, hyps, Some(dim))))
        }
        SpaceSpec::Shattered { d, k } => {
            if d == 0 || k < 1 {
                return Err(invalid("shattered space needs d >= 1 and k >= 1"));
            }
            let total = (k as usize)
                .checked_pow(d as u32)
                .filter(|t| *t <= MAX_SHATTERED)
                .ok_or_else(|| invalid(format!("k^d too large for shattered({d}, {k})")))?;
            let hyps = (0..total)
                .map(|mut code| {
                    let mut labels = vec![0; d];
                    for l in labels.iter_mut() {
                        *l = (code % k as usize) as Label + 1;
                        code /= k as usize;
                    }
                    Hypothesis::new(labels)
                })
                .collect();
            let dim = if k >= 2 { d } else { 0 };
            Ok((Domain::uniform(d)?, HypothesisSpace::from_parts(k, d, hyps, Some(dim))))
        }
        SpaceSpec::Explicit { ref path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            read_space(&text)
        }
    }
}

fn check(grid: usize, k: Label) -> Result<()> {
    if grid == 0 {
        return Err(invalid("grid size must be positive"));
    }
    if k < 2 {
        return Err(invalid("thresholds and intervals need k >= 2"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn thresholds_count() {
        let (dom, sp) = builtin_space(&SpaceSpec::Thresholds { grid: 10, k: 2 }).unwrap();
        assert_eq!(dom.len(), 10);
        assert_eq!(sp.len(), 11);
        assert!(dom.is_uniform());
    }

    #[test]
    fn intervals_count_matches_enumeration() {
        for n in 1..15 {
            let (_, sp) = builtin_space(&SpaceSpec::Intervals { grid: n, k: 2 }).unwrap();
            let mut distinct = HashSet::new();
            for a in 0..=n {
                for b in a..=n {
                    let v: Vec<Label> = (0..n).map(|x| if a <= x && x < b { 2 } else { 1 }).collect();
                    distinct.insert(v);
                }
            }
            assert_eq!(sp.len(), distinct.len());
            assert_eq!(sp.len(), n * (n + 1) / 2 + 1);
            // constructor validation agrees: no duplicates slipped in
            HypothesisSpace::new(2, sp.hypotheses().to_vec(), None).unwrap();
        }
    }

    #[test]
    fn shattered_has_all_labelings() {
        let (dom, sp) = builtin_space(&SpaceSpec::Shattered { d: 3, k: 2 }).unwrap();
        assert_eq!(dom.len(), 3);
        assert_eq!(sp.len(), 8);
        let set: HashSet<Vec<Label>> = sp.hypotheses().iter().map(|h| h.labels().to_vec()).collect();
        assert_eq!(set.len(), 8);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "thresholds:200".parse::<SpaceSpec>().unwrap(),
            SpaceSpec::Thresholds { grid: 200, k: 2 }
        );
        assert_eq!(
            "intervals:50:3".parse::<SpaceSpec>().unwrap(),
            SpaceSpec::Intervals { grid: 50, k: 3 }
        );
        assert!("blobs:3".parse::<SpaceSpec>().is_err());
        assert!("thresholds".parse::<SpaceSpec>().is_err());
        assert!(builtin_space(&SpaceSpec::Thresholds { grid: 0, k: 2 }).is_err());
    }
}
