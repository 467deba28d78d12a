use crate::error::Result;
use crate::hypothesis::{Hypothesis, Label};
use crate::oracle::{CcqOracle, CcqResponse, PositionBits, QuerySet};

/// Looks for a point of `set` that `h` mislabels.
///
/// Asks one query per label `y = 1..=k`, over the positions where `h`
/// predicts something other than `y`, and stops at the first hit. The
/// returned label is the true one. When `h` makes no mistake on `set`
/// exactly `k` queries are spent.
pub fn find_mistake(
    oracle: &mut dyn CcqOracle,
    set: &[usize],
    h: &Hypothesis,
) -> Result<Option<(usize, Label)>> {
    let mut buf = Vec::with_capacity(set.len());
    for y in 1..=oracle.num_labels() {
        buf.clear();
        buf.extend(set.iter().copied().filter(|&p| h.label(oracle.point(p)) != y));
        if let CcqResponse::Found { position, label } =
            oracle.class_conditional(y, QuerySet::Positions(&buf))?
        {
            return Ok(Some((position, label)));
        }
    }
    Ok(None)
}

/// Same as [`find_mistake`], with the per-label query sets already built.
pub(crate) fn find_mistake_bits(
    oracle: &mut dyn CcqOracle,
    per_label: &[PositionBits],
) -> Result<Option<(usize, Label)>> {
    for (i, bits) in per_label.iter().enumerate() {
        let y = i as Label + 1;
        if let CcqResponse::Found { position, label } = oracle.class_conditional(y, QuerySet::Bits(bits))? {
            return Ok(Some((position, label)));
        }
    }
    Ok(None)
}
