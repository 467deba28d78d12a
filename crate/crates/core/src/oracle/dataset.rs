use std::sync::Arc;

use super::distribution::GroundTruth;
use super::positions::PositionBits;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::Label;
use crate::seed::{derive, mix64, unit_f64};

/// Positions below this are drawn eagerly; later ones are recomputed on demand.
pub const PREFIX_LIMIT: usize = 1 << 22;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// An i.i.d. sequence of labeled points drawn from a [`GroundTruth`].
///
/// The pair at position `p` is a pure function of `(seed, p)`, so a stream
/// of any length costs memory only for its eagerly drawn prefix. Points are
/// public; labels are meant to be reached through an oracle.
#[derive(Debug, Clone)]
pub struct DataSet {
    gt: Arc<GroundTruth>,
    len: usize,
    seed: u64,
    x_seed: u64,
    y_seed: u64,
    cdf: Option<Vec<f64>>,
    xs: Vec<u32>,
    ys: Vec<Label>,
    label_bits: Vec<PositionBits>,
}

impl DataSet {
    pub fn draw(gt: impl Into<Arc<GroundTruth>>, len: usize, seed: u64) -> Result<Self> {
        let gt = gt.into();
        if len == 0 {
            return Err(invalid("data set length must be at least 1"));
        }
        if gt.domain().len() > u32::MAX as usize {
            return Err(invalid("domain too large"));
        }
        let cdf = (!gt.domain().is_uniform()).then(|| {
            let mut acc = 0.0;
            gt.domain()
                .weights()
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect()
        });
        let mut ds = DataSet {
            len,
            seed,
            x_seed: derive(seed, &[0]),
            y_seed: derive(seed, &[1]),
            cdf,
            xs: Vec::new(),
            ys: Vec::new(),
            label_bits: Vec::new(),
            gt,
        };
        let prefix = len.min(PREFIX_LIMIT);
        let k = ds.gt.k() as usize;
        ds.label_bits = vec![PositionBits::new(prefix); k];
        ds.xs.reserve_exact(prefix);
        ds.ys.reserve_exact(prefix);
        for p in 0..prefix {
            let (x, y) = ds.compute(p);
            ds.xs.push(x as u32);
            ds.ys.push(y);
            ds.label_bits[y as usize - 1].insert(p);
        }
        Ok(ds)
    }

    fn compute(&self, p: usize) -> (usize, Label) {
        let ux = unit_f64(mix64(self.x_seed.wrapping_add((p as u64).wrapping_mul(GOLDEN))));
        let n = self.gt.domain().len();
        let x = match &self.cdf {
            None => ((ux * n as f64) as usize).min(n - 1),
            Some(cdf) => cdf.partition_point(|c| *c <= ux).min(n - 1),
        };
        let uy = unit_f64(mix64(self.y_seed.wrapping_add((p as u64).wrapping_mul(GOLDEN))));
        (x, self.gt.sample_label(x, uy))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.gt
    }

    pub fn shared_ground_truth(&self) -> Arc<GroundTruth> {
        self.gt.clone()
    }

    pub(crate) fn check(&self, pos: usize) -> Result<()> {
        if pos >= self.len {
            return Err(Error::PositionOutOfBounds {
                position: pos,
                len: self.len,
            });
        }
        Ok(())
    }

    /// Domain point at `pos`. Panics when `pos >= len()`.
    #[inline]
    pub fn point(&self, pos: usize) -> usize {
        if pos < self.xs.len() {
            self.xs[pos] as usize
        } else {
            assert!(pos < self.len, "position {pos} beyond stream length {}", self.len);
            self.compute(pos).0
        }
    }

    /// Hidden label at `pos`. For evaluation and test oracles only: learners
    /// reach labels through a query oracle so every access is counted.
    #[inline]
    pub fn reveal_label(&self, pos: usize) -> Label {
        if pos < self.ys.len() {
            self.ys[pos]
        } else {
            assert!(pos < self.len, "position {pos} beyond stream length {}", self.len);
            self.compute(pos).1
        }
    }

    pub(crate) fn prefix_len(&self) -> usize {
        self.xs.len()
    }

    /// Positions in the eager prefix whose hidden label is `y`.
    pub(crate) fn label_bits(&self, y: Label) -> &PositionBits {
        &self.label_bits[y as usize - 1]
    }
}
