//! Splitting-based active learning under bounded noise.

mod learner;

pub use learner::{splitting_active_learn, Labeling, SplittingConfig, SplittingLearner, SplittingOutcome};

use crate::error::{Failure, Result};
use crate::hypothesis::{HypothesisSpace, Label};
use crate::oracle::CcqOracle;

/// Unordered hypothesis pairs, stored as `(h, g)` with `h < g`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(u32, u32)>,
}

impl PairSet {
    /// Normalizes each pair and drops duplicates and self-pairs.
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut v: Vec<(u32, u32)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b) as u32, a.max(b) as u32))
            .collect();
        v.sort_unstable();
        v.dedup();
        PairSet { pairs: v }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|&(a, b)| (a as usize, b as usize))
    }

    /// `|Q_x^y|` for every label `y` (index `y - 1`).
    pub fn agreement_counts(&self, space: &HypothesisSpace, x: usize) -> Vec<usize> {
        let hyps = space.hypotheses();
        let mut counts = vec![0usize; space.k() as usize];
        for &(a, b) in &self.pairs {
            let y = hyps[a as usize].label(x);
            if y == hyps[b as usize].label(x) {
                counts[y as usize - 1] += 1;
            }
        }
        counts
    }

    /// `Q_x^y`: the pairs whose members both label `x` as `y`.
    pub fn agreeing(&self, space: &HypothesisSpace, x: usize, y: Label) -> PairSet {
        let hyps = space.hypotheses();
        PairSet {
            pairs: self
                .pairs
                .iter()
                .copied()
                .filter(|&(a, b)| hyps[a as usize].label(x) == y && hyps[b as usize].label(x) == y)
                .collect(),
        }
    }

    /// Keeps pairs whose members are both alive.
    pub fn retain_alive(&mut self, alive: &[bool]) {
        self.pairs.retain(|&(a, b)| alive[a as usize] && alive[b as usize]);
    }
}

/// Ordered-pair counters `M[h][g]`: labeled points where `h` errs and `g` is right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCounters {
    n: usize,
    m: Vec<u64>,
}

impl SplitCounters {
    pub fn new(n: usize) -> Self {
        SplitCounters { n, m: vec![0; n * n] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, h: usize, g: usize) -> u64 {
        self.m[h * self.n + g]
    }

    pub fn set(&mut self, h: usize, g: usize, value: u64) {
        self.m[h * self.n + g] = value;
    }

    /// Adds one labeled domain point `(x, y)` for the hypotheses marked alive.
    pub fn record(&mut self, space: &HypothesisSpace, alive: &[bool], x: usize, y: Label) {
        let hyps = space.hypotheses();
        let (right, wrong): (Vec<usize>, Vec<usize>) =
            (0..self.n).filter(|&h| alive[h]).partition(|&h| hyps[h].label(x) == y);
        for &h in &wrong {
            let row = h * self.n;
            for &g in &right {
                self.m[row + g] += 1;
            }
        }
    }
}

/// The elimination threshold `c_e (sqrt(max * d ln(1/eps0)) + d ln(1/eps0))`.
pub fn elimination_threshold(max_count: u64, d: usize, eps0: f64, c_e: f64) -> f64 {
    let l = d as f64 * (1.0 / eps0).ln();
    c_e * ((max_count as f64 * l).sqrt() + l)
}

/// Marks dead every alive `h` for which some alive `g` has `M_hg - M_gh` above the threshold.
///
/// All comparisons use the counters before any removal. Returns the number removed.
pub fn eliminate(alive: &mut [bool], m: &SplitCounters, d: usize, eps0: f64, c_e: f64) -> usize {
    let live: Vec<usize> = (0..alive.len()).filter(|&h| alive[h]).collect();
    let doomed: Vec<usize> = live
        .iter()
        .copied()
        .filter(|&h| {
            live.iter().any(|&g| {
                let (hg, gh) = (m.get(h, g), m.get(g, h));
                hg > gh && (hg - gh) as f64 > elimination_threshold(hg.max(gh), d, eps0, c_e)
            })
        })
        .collect();
    for &h in &doomed {
        alive[h] = false;
    }
    doomed.len()
}

/// Among `window` (domain points), the first one minimizing `max_y |Q_x^y|`, with its
/// smallest maximizing label and that maximum.
pub fn select_in_window(space: &HypothesisSpace, q: &PairSet, window: &[usize]) -> Option<(usize, Label, usize)> {
    let mut best: Option<(usize, Label, usize)> = None;
    for (i, &x) in window.iter().enumerate() {
        let counts = q.agreement_counts(space, x);
        let (mut y, mut top) = (1 as Label, counts[0]);
        for (j, &c) in counts.iter().enumerate().skip(1) {
            if c > top {
                (y, top) = (j as Label + 1, c);
            }
        }
        if best.is_none_or(|(_, _, b)| top < b) {
            best = Some((i, y, top));
        }
    }
    best
}

/// Scans the `ceil(1/tau)` stream positions starting at `cursor` and picks the best splitter.
///
/// Returns the chosen position, its majority label and the cursor after the window.
pub fn select_splitter(
    oracle: &dyn CcqOracle,
    space: &HypothesisSpace,
    cursor: usize,
    q: &PairSet,
    tau: f64,
) -> Result<(usize, Label, usize)> {
    let w = window_len(tau);
    let len = oracle.stream_len();
    if cursor + w > len {
        return Err(Failure::StreamExhausted {
            needed: cursor + w - len,
            available: len.saturating_sub(cursor),
        }
        .into());
    }
    let points: Vec<usize> = (cursor..cursor + w).map(|p| oracle.point(p)).collect();
    let (i, y, _) = select_in_window(space, q, &points).expect("window is nonempty");
    Ok((cursor + i, y, cursor + w))
}

/// `ceil(1/tau)`.
pub fn window_len(tau: f64) -> usize {
    ((1.0 / tau).ceil() as usize).max(1)
}
