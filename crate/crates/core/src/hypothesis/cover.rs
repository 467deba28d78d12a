use super::{Domain, HypothesisSpace, Label};
use crate::error::{invalid, Result};

const PIVOTS: usize = 3;

/// Greedy ε-cover: scan `space` in order and keep every hypothesis not
/// already within `eps` of a kept center.
///
/// Candidate centers are pruned with the triangle inequality against a few
/// pivot hypotheses before the exact distance is computed.
pub fn epsilon_cover(space: &HypothesisSpace, dom: &Domain, eps: f64) -> Result<HypothesisSpace> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(invalid(format!("cover radius {eps} not in (0, 1]")));
    }
    space.check_domain(dom)?;
    let hyps = space.hypotheses();
    let m = hyps.len();
    let pivots: Vec<usize> = [0, m / 2, m - 1][..PIVOTS.min(m)].to_vec();
    let to_pivot: Vec<[f64; PIVOTS]> = hyps
        .iter()
        .map(|h| {
            let mut row = [0.0; PIVOTS];
            for (r, &p) in row.iter_mut().zip(&pivots) {
                *r = super::distance(h.labels(), hyps[p].labels(), dom);
            }
            row
        })
        .collect();

    let slack = 1e-12;
    let mut centers: Vec<usize> = Vec::new();
    for (i, h) in hyps.iter().enumerate() {
        let covered = centers.iter().rev().any(|&c| {
            let lower = to_pivot[i]
                .iter()
                .zip(&to_pivot[c])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            lower <= eps + slack && within(h.labels(), hyps[c].labels(), dom, eps + slack)
        });
        if !covered {
            centers.push(i);
        }
    }
    log::debug!("greedy {eps}-cover kept {} of {m} hypotheses", centers.len());
    let kept = centers.into_iter().map(|i| hyps[i].clone()).collect();
    Ok(HypothesisSpace::from_parts(
        space.k(),
        space.domain_size(),
        kept,
        space.natarajan_dim(),
    ))
}

/// Whether the weighted disagreement of `a` and `b` is at most `r`, stopping early.
fn within(a: &[Label], b: &[Label], dom: &Domain, r: f64) -> bool {
    if dom.is_uniform() {
        let limit = (r / dom.weight(0)).floor() as usize;
        let mut count = 0;
        for (x, y) in a.iter().zip(b) {
            if x != y {
                count += 1;
                if count > limit {
                    return false;
                }
            }
        }
        true
    } else {
        let mut mass = 0.0;
        for ((x, y), w) in a.iter().zip(b).zip(dom.weights()) {
            if x != y {
                mass += w;
                if mass > r {
                    return false;
                }
            }
        }
        true
    }
}
