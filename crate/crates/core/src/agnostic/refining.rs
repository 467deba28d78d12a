use super::find_mistake::find_mistake_bits;
use crate::error::{invalid, Result};
use crate::hypothesis::{Hypothesis, Label, LabeledSample};
use crate::oracle::{CcqOracle, CcqResponse, PositionBits, QuerySet};

/// Labels produced by a refining pass.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub sample: LabeledSample,
    /// Whether every position of the pool was labeled.
    pub complete: bool,
    /// Find-Mistake invocations spent.
    pub calls: u64,
}

/// Labels `u` by repeatedly extracting mistakes of `h`.
///
/// Each found mistake is added with its true label and costs one unit of
/// `budget`. When a call finds no mistake the rest of the pool is labeled by
/// `h`. With `m` mistakes on `u` and enough budget this takes `m + 1` calls.
pub fn refining(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    h: &Hypothesis,
    budget: Option<u64>,
) -> Result<RefineOutcome> {
    if budget == Some(0) {
        return Err(invalid("refining budget must be at least 1"));
    }
    let mut sample = Vec::with_capacity(u.len());
    let (complete, calls) = refine_into(oracle, u, h, budget, &mut sample)?;
    Ok(RefineOutcome {
        sample: LabeledSample::from_unique(sample),
        complete,
        calls,
    })
}

/// Refining on consecutive chunks of `u`, sharing one budget.
///
/// Stops at the first chunk that runs out of budget.
pub fn chunked_refining(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    h: &Hypothesis,
    chunk_size: usize,
    budget: Option<u64>,
) -> Result<RefineOutcome> {
    if chunk_size == 0 {
        return Err(invalid("chunk size must be at least 1"));
    }
    if budget == Some(0) {
        return Err(invalid("refining budget must be at least 1"));
    }
    let mut sample = Vec::with_capacity(u.len());
    let mut calls = 0u64;
    for chunk in u.chunks(chunk_size) {
        let left = budget.map(|b| b - calls);
        if left == Some(0) {
            return Ok(RefineOutcome {
                sample: LabeledSample::from_unique(sample),
                complete: false,
                calls,
            });
        }
        let (done, c) = refine_into(oracle, chunk, h, left, &mut sample)?;
        calls += c;
        if !done {
            return Ok(RefineOutcome {
                sample: LabeledSample::from_unique(sample),
                complete: false,
                calls,
            });
        }
    }
    Ok(RefineOutcome {
        sample: LabeledSample::from_unique(sample),
        complete: true,
        calls,
    })
}

fn refine_into(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    h: &Hypothesis,
    budget: Option<u64>,
    out: &mut Vec<(usize, Label)>,
) -> Result<(bool, u64)> {
    if u.is_empty() {
        return Ok((true, 0));
    }
    let max = *u.iter().max().expect("nonempty");
    // bitmaps start at position 0, so they pay off only for dense early pools
    if (max + 1) / 64 <= u.len() / 2 && u.len() > 256 {
        refine_bits(oracle, u, max + 1, h, budget, out)
    } else {
        refine_list(oracle, u, h, budget, out)
    }
}

fn refine_list(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    h: &Hypothesis,
    budget: Option<u64>,
    out: &mut Vec<(usize, Label)>,
) -> Result<(bool, u64)> {
    let k = oracle.num_labels();
    let mut w: Vec<(usize, Label)> = u.iter().map(|&p| (p, h.label(oracle.point(p)))).collect();
    let mut buf = Vec::with_capacity(w.len());
    let mut calls = 0u64;
    while budget.is_none_or(|b| calls < b) {
        calls += 1;
        let mut found = None;
        for y in 1..=k {
            buf.clear();
            buf.extend(w.iter().filter(|(_, hp)| *hp != y).map(|(p, _)| *p));
            if let CcqResponse::Found { position, label } =
                oracle.class_conditional(y, QuerySet::Positions(&buf))?
            {
                found = Some((position, label));
                break;
            }
        }
        match found {
            Some((p, y)) => {
                out.push((p, y));
                w.retain(|(q, _)| *q != p);
            }
            None => {
                out.extend(w.iter().copied());
                return Ok((true, calls));
            }
        }
    }
    Ok((false, calls))
}

fn refine_bits(
    oracle: &mut dyn CcqOracle,
    u: &[usize],
    universe: usize,
    h: &Hypothesis,
    budget: Option<u64>,
    out: &mut Vec<(usize, Label)>,
) -> Result<(bool, u64)> {
    let k = oracle.num_labels();
    // per label y: pool positions where h predicts something other than y
    let mut per_label = vec![PositionBits::new(universe); k as usize];
    for &p in u {
        let hp = h.label(oracle.point(p));
        for (i, bits) in per_label.iter_mut().enumerate() {
            if i as Label + 1 != hp {
                bits.insert(p);
            }
        }
    }
    let mut removed = PositionBits::new(universe);
    let mut calls = 0u64;
    while budget.is_none_or(|b| calls < b) {
        calls += 1;
        match find_mistake_bits(oracle, &per_label)? {
            Some((p, y)) => {
                out.push((p, y));
                removed.insert(p);
                for bits in per_label.iter_mut() {
                    bits.remove(p);
                }
            }
            None => {
                out.extend(
                    u.iter()
                        .filter(|&&p| !removed.contains(p))
                        .map(|&p| (p, h.label(oracle.point(p)))),
                );
                return Ok((true, calls));
            }
        }
    }
    Ok((false, calls))
}
