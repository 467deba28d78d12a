use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sweep::{median, read_rows, CsvRow};
use crate::error::{invalid, Result};

/// The sweep parameter a fit runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitAxis {
    /// The noise level.
    Eta,
    /// `1/eps`, so that growth in the query count shows as a positive slope.
    InvEps,
    D,
}

impl FromStr for FitAxis {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" | "alpha" | "noise" => Ok(FitAxis::Eta),
            "eps" => Ok(FitAxis::InvEps),
            "d" => Ok(FitAxis::D),
            other => Err(invalid(format!("unknown fit axis `{other}` (expected eta, eps or d)"))),
        }
    }
}

impl FitAxis {
    pub fn value(self, row: &CsvRow) -> Option<f64> {
        match self {
            FitAxis::Eta => Some(row.noise_level),
            FitAxis::InvEps => Some(1.0 / row.eps),
            FitAxis::D => row.d.map(|d| d as f64),
        }
    }
}

/// Log-log least-squares fit of median query counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// 2.5% and 97.5% bootstrap quantiles of the slope.
    pub ci: (f64, f64),
    /// `(x, median)` per axis value, ascending in `x`.
    pub points: Vec<(f64, f64)>,
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn ols(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(invalid("a line fit needs at least two points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("all x values coincide"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn loglog(groups: &[(f64, Vec<f64>)], warn: bool) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let mut pts = Vec::new();
    for (x, ys) in groups {
        match median(ys) {
            Some(m) if m > 0.0 && *x > 0.0 => pts.push((*x, m)),
            _ if warn => log::warn!("dropping axis value {x}: nonpositive median or value"),
            _ => {}
        }
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept) = ols(&logs)?;
    Ok((slope, intercept, pts))
}

/// Fits `ln(median y) = a + slope ln x` over groups of observations and
/// bootstraps the slope by resampling each group with replacement.
pub fn fit_groups(groups: &[(f64, Vec<f64>)], reps: usize, seed: u64) -> Result<ScalingFit> {
    if groups.len() < 3 {
        return Err(invalid(format!("a scaling fit needs at least 3 axis values, got {}", groups.len())));
    }
    let (slope, intercept, points) = loglog(groups, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(reps);
    for _ in 0..reps {
        let resampled: Vec<(f64, Vec<f64>)> = groups
            .iter()
            .map(|(x, ys)| (*x, (0..ys.len()).map(|_| ys[rng.random_range(0..ys.len())]).collect()))
            .collect();
        if let Ok((s, _, _)) = loglog(&resampled, false) {
            slopes.push(s);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        if slopes.is_empty() {
            return f64::NAN;
        }
        slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)]
    };
    Ok(ScalingFit {
        slope,
        intercept,
        ci: (q(0.025), q(0.975)),
        points,
    })
}

/// Groups the trial rows of `rows` by `axis` and fits their `ccq_count`.
pub fn fit_rows(rows: &[CsvRow], axis: FitAxis, reps: usize, seed: u64) -> Result<ScalingFit> {
    let mut groups: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.row_type == "trial") {
        let (Some(x), Some(c)) = (axis.value(row), row.ccq_count) else {
            continue;
        };
        groups.entry(x.to_bits()).or_insert((x, Vec::new())).1.push(c as f64);
    }
    let mut groups: Vec<(f64, Vec<f64>)> = groups.into_values().collect();
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_groups(&groups, reps, seed)
}

/// Reads a sweep CSV and fits median query counts against `axis`.
pub fn fit_scaling(path: &Path, axis: FitAxis, reps: usize, seed: u64) -> Result<ScalingFit> {
    fit_rows(&read_rows(path)?, axis, reps, seed)
}
