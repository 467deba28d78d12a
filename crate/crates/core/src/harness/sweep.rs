use std::fs::{File, OpenOptions};
use std::io::{Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{noise_label, space_label, Cell, ExperimentConfig, SCHEMA_VERSION};
use super::trial::{trial_seed, CellRunner, TrialRecord};
use crate::error::{Error, Result};
use crate::seed::mix64;

/// One CSV line: a trial, or a per-cell summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema_version: u32,
    pub row_type: String,
    pub cell: usize,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub algorithm: String,
    pub space: String,
    pub noise: String,
    pub noise_level: f64,
    pub eps: f64,
    pub delta: f64,
    pub d: Option<usize>,
    pub k: Option<u16>,
    pub target_index: Option<usize>,
    pub noise_rate: Option<f64>,
    pub error: Option<f64>,
    pub success: Option<bool>,
    pub ccq_count: Option<u64>,
    pub label_request_count: Option<u64>,
    pub wall_ms: Option<f64>,
    pub failure: Option<String>,
    pub trials: Option<usize>,
    pub success_freq: Option<f64>,
    pub median_ccq: Option<f64>,
}

impl From<&TrialRecord> for CsvRow {
    fn from(r: &TrialRecord) -> Self {
        CsvRow {
            schema_version: SCHEMA_VERSION,
            row_type: "trial".into(),
            cell: r.cell,
            trial: Some(r.trial),
            seed: Some(r.seed),
            algorithm: r.algorithm.clone(),
            space: r.space.clone(),
            noise: r.noise.clone(),
            noise_level: r.noise_level,
            eps: r.eps,
            delta: r.delta,
            d: Some(r.d),
            k: Some(r.k),
            target_index: Some(r.target_index),
            noise_rate: Some(r.noise_rate),
            error: r.error,
            success: Some(r.success),
            ccq_count: Some(r.ccq_count),
            label_request_count: Some(r.label_request_count),
            wall_ms: r.wall_ms,
            failure: r.failure.clone(),
            trials: None,
            success_freq: None,
            median_ccq: None,
        }
    }
}

/// Median of the values; the mean of the middle two for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub trials: usize,
    pub success_freq: f64,
    pub median_ccq: f64,
}

pub fn summarize(cell: &Cell, records: &[TrialRecord]) -> (CellSummary, CsvRow) {
    let n = records.len();
    let wins = records.iter().filter(|r| r.success).count();
    let ccq: Vec<f64> = records.iter().map(|r| r.ccq_count as f64).collect();
    let s = CellSummary {
        cell: cell.index,
        trials: n,
        success_freq: wins as f64 / n.max(1) as f64,
        median_ccq: median(&ccq).unwrap_or(0.0),
    };
    let row = CsvRow {
        schema_version: SCHEMA_VERSION,
        row_type: "summary".into(),
        cell: cell.index,
        trial: None,
        seed: None,
        algorithm: cell.learner.name().into(),
        space: space_label(&cell.space),
        noise: noise_label(&cell.noise).into(),
        noise_level: cell.noise.level(),
        eps: cell.eps,
        delta: cell.delta,
        d: records.first().map(|r| r.d),
        k: records.first().map(|r| r.k),
        target_index: None,
        noise_rate: None,
        error: None,
        success: None,
        ccq_count: None,
        label_request_count: None,
        wall_ms: None,
        failure: None,
        trials: Some(n),
        success_freq: Some(s.success_freq),
        median_ccq: Some(s.median_ccq),
    };
    (s, row)
}

/// Runs every trial of one cell, in parallel, in trial order.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<Vec<TrialRecord>> {
    let runner = CellRunner::new(cell)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| runner.run_trial(t, trial_seed(cfg.seed, cell.index, t)))
        .collect()
}

/// The marker file recording sweep progress next to `out`.
pub fn resume_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".resume");
    PathBuf::from(name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct ResumeMarker {
    config_hash: u64,
    cells_done: usize,
    bytes: u64,
}

/// Hash of the serialized config, stored in the resume marker.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<u64> {
    let text = cfg.to_toml()?;
    Ok(text.bytes().fold(0x5eed, |h, b| mix64(h ^ u64::from(b))))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Runs the sweep into `out`, writing each cell's trial rows and then its
/// summary row.
///
/// After each cell a marker next to `out` records how far the file is
/// valid. If a marker for the same config is present, the sweep truncates
/// the file to that point and continues with the next cell. The marker is
/// removed when the sweep completes.
pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<CellSummary>> {
    let cells = cfg.cells()?;
    let marker_path = resume_path(out);
    let hash = config_hash(cfg)?;
    let marker: Option<ResumeMarker> = std::fs::read_to_string(&marker_path)
        .ok()
        .and_then(|t| toml::from_str(&t).ok())
        .filter(|m: &ResumeMarker| m.config_hash == hash && out.exists());

    let (mut file, start) = match marker {
        Some(m) => {
            let mut f = OpenOptions::new().write(true).open(out).map_err(|e| io_err(out, e))?;
            f.set_len(m.bytes).map_err(|e| io_err(out, e))?;
            f.seek(SeekFrom::End(0)).map_err(|e| io_err(out, e))?;
            log::info!("resuming {} after {} cells", out.display(), m.cells_done);
            (f, m.cells_done)
        }
        None => (File::create(out).map_err(|e| io_err(out, e))?, 0),
    };
    let mut summaries = Vec::new();
    for cell in &cells[start..] {
        let records = run_cell(cfg, cell)?;
        let (summary, row) = summarize(cell, &records);
        {
            let mut w = csv::WriterBuilder::new()
                .has_headers(start == 0 && cell.index == 0)
                .from_writer(&mut file);
            for r in &records {
                w.serialize(CsvRow::from(r)).map_err(|e| io_err(out, e))?;
            }
            w.serialize(row).map_err(|e| io_err(out, e))?;
            w.flush().map_err(|e| io_err(out, e))?;
        }
        file.flush().map_err(|e| io_err(out, e))?;
        let bytes = file.stream_position().map_err(|e| io_err(out, e))?;
        let m = ResumeMarker {
            config_hash: hash,
            cells_done: cell.index + 1,
            bytes,
        };
        let text = toml::to_string(&m).map_err(|e| io_err(&marker_path, e))?;
        std::fs::write(&marker_path, text).map_err(|e| io_err(&marker_path, e))?;
        log::info!(
            "cell {}: success {:.3}, median ccq {}",
            cell.index,
            summary.success_freq,
            summary.median_ccq
        );
        summaries.push(summary);
    }
    std::fs::remove_file(&marker_path).map_err(|e| io_err(&marker_path, e))?;
    Ok(summaries)
}

/// Reads the rows of a sweep CSV.
pub fn read_rows(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}
