use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sift::Feature;
use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};

pub const DEFAULT_D_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatch {
    pub ref_index: usize,
    pub sensed_index: usize,
    /// Distance to the nearest sensed descriptor.
    pub d1: f64,
    /// Distance to the second nearest.
    pub d2: f64,
}

/// Nearest and second-nearest neighbour among sensed features sharing the
/// reference feature's mask value.
fn two_nearest(f: &Feature, sensed: &[Feature]) -> Option<(usize, f64, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut second = f64::INFINITY;
    for (j, g) in sensed.iter().enumerate() {
        if g.keypoint.mask_value != f.keypoint.mask_value {
            continue;
        }
        let d = f.descriptor.distance(&g.descriptor);
        match best {
            Some((_, b)) if d >= b => second = second.min(d),
            Some((_, b)) => {
                second = b;
                best = Some((j, d));
            }
            None => best = Some((j, d)),
        }
    }
    best.map(|(j, d1)| (j, d1, second))
}

/// Ratio-test matches, one-to-one on the sensed side. When several reference
/// features pick the same sensed feature, the closest one (then the lowest
/// reference index) is kept. Output is ordered by reference index.
pub fn ratio_match_detailed(
    reference: &[Feature],
    sensed: &[Feature],
    d_ratio: f64,
) -> Result<Vec<FeatureMatch>> {
    if !(d_ratio > 0.0 && d_ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dRatio {d_ratio} not in (0, 1]"
        )));
    }
    let candidates: Vec<FeatureMatch> = reference
        .par_iter()
        .enumerate()
        .filter_map(|(i, f)| {
            let (j, d1, d2) = two_nearest(f, sensed)?;
            (d2.is_finite() && d2 > 0.0 && d1 / d2 < d_ratio).then_some(FeatureMatch {
                ref_index: i,
                sensed_index: j,
                d1,
                d2,
            })
        })
        .collect();

    let mut winner: Vec<Option<usize>> = vec![None; sensed.len()];
    for (k, m) in candidates.iter().enumerate() {
        let slot = &mut winner[m.sensed_index];
        match *slot {
            Some(prev) if candidates[prev].d1 <= m.d1 => {}
            _ => *slot = Some(k),
        }
    }
    let mut keep: Vec<usize> = winner.into_iter().flatten().collect();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|k| candidates[k]).collect())
}

/// Matched keypoint positions as a correspondence set.
pub fn ratio_match(
    reference: &[Feature],
    sensed: &[Feature],
    d_ratio: f64,
) -> Result<CorrespondenceSet> {
    let matches = ratio_match_detailed(reference, sensed, d_ratio)?;
    Ok(CorrespondenceSet::from_pairs(matches.iter().map(|m| {
        let (p, q) = (
            &reference[m.ref_index].keypoint,
            &sensed[m.sensed_index].keypoint,
        );
        ([p.x, p.y], [q.x, q.y])
    })))
}
