//! Geometrical outlier removal.
//!
//! For every directed edge between two matched points, each other point lies
//! left of it, right of it, or on it. A correct match set classifies every
//! point the same way in both images, so the filter repeatedly drops the
//! correspondences involved in the most disagreements until none remain.
//!
//! Orientation signs are exact: coordinates are snapped to a `1/256` px grid
//! and determinants are evaluated in 128-bit integers.

mod angular;
mod ledger;
mod oracle;
mod predicate;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use ledger::{classify, DisparityLedger, SignTable};
pub use oracle::{brute_force_oracle, ORACLE_MAX_N};
pub use predicate::{edge_sign, orientation, GridPoint, GRID_SCALE};

use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalEvent {
    pub iteration: usize,
    pub index: usize,
    pub score: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GorOutcome {
    /// Surviving pairs in their original relative order.
    pub survivors: CorrespondenceSet,
    /// Original indices of the survivors.
    pub kept: Vec<usize>,
    /// Original indices removed, in removal order.
    pub removed: Vec<usize>,
    pub events: Vec<RemovalEvent>,
    pub iterations: usize,
    /// Fewer than three correspondences were left.
    pub degenerate: bool,
}

impl GorOutcome {
    /// Writes `iteration,removed_index,S_value` rows.
    pub fn write_removal_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iteration,removed_index,S_value")?;
        for e in &self.events {
            writeln!(out, "{},{},{}", e.iteration, e.index, e.score)?;
        }
        Ok(())
    }
}

/// Removes, one round at a time, every correspondence attaining the largest
/// accumulated disparity, until all side classifications agree or fewer than
/// three pairs remain.
///
/// Assumes the true mapping preserves orientation; a mirrored pair of images
/// flips every sign and nothing would survive.
pub fn remove_outliers(cs: &CorrespondenceSet) -> Result<GorOutcome> {
    let table = classify(cs)?;
    let mut ledger = table.ledger();
    let mut removed = Vec::new();
    let mut events = Vec::new();
    let mut iterations = 0;
    let mut degenerate = false;

    while !ledger.is_all_zero() {
        iterations += 1;
        let (score, worst) = ledger.argmax();
        for r in worst {
            ledger.remove(&table, r);
            removed.push(r);
            events.push(RemovalEvent {
                iteration: iterations,
                index: r,
                score,
            });
        }
        if ledger.live_count() < 3 {
            degenerate = true;
            break;
        }
    }

    let kept = ledger.live_indices();
    Ok(GorOutcome {
        survivors: cs.select(&kept),
        kept,
        removed,
        events,
        iterations,
        degenerate,
    })
}

/// Ledger of a set computed from scratch; used to re-check the stop condition.
pub fn fresh_ledger(cs: &CorrespondenceSet) -> Result<DisparityLedger> {
    if cs.len() < 3 {
        return Err(Error::InsufficientCorrespondences {
            needed: 3,
            got: cs.len(),
        });
    }
    Ok(classify(cs)?.ledger())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::AffineTransform;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mapped(points: &[[f64; 2]], t: &AffineTransform) -> CorrespondenceSet {
        CorrespondenceSet::from_pairs(points.iter().map(|&p| (p, t.apply_point(p))))
    }

    fn six_points() -> Vec<[f64; 2]> {
        vec![
            [10.0, 12.0],
            [55.0, 20.0],
            [80.0, 64.0],
            [47.0, 90.0],
            [15.0, 70.0],
            [40.0, 45.0],
        ]
    }

    #[test]
    fn rotated_six_points_keep_everything() {
        let cs = mapped(
            &six_points(),
            &AffineTransform::rotation(-35.0).about(50.0, 50.0),
        );
        let out = remove_outliers(&cs).unwrap();
        assert!(out.removed.is_empty());
        assert_eq!(out.survivors, cs);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn one_corrupted_target_is_the_only_removal() {
        // Six inliers under a rotation plus a seventh pair whose target lands
        // on the other side of several edges.
        let t = AffineTransform::rotation(-35.0).about(50.0, 50.0);
        let mut cs = mapped(&six_points(), &t);
        let p7 = [62.0, 42.0];
        let q7 = t.apply_point([20.0, 40.0]);
        cs.push(p7, q7);

        let oracle = brute_force_oracle(&cs).unwrap();
        let worst = (0..7).max_by_key(|&i| oracle.per_point(i)).unwrap();
        assert_eq!(worst, 6);
        assert_eq!(classify(&cs).unwrap().ledger(), oracle);

        let out = remove_outliers(&cs).unwrap();
        assert_eq!(out.removed, vec![6]);
        assert_eq!(out.kept, vec![0, 1, 2, 3, 4, 5]);
        assert!(!out.degenerate);
    }

    #[test]
    fn three_exact_pairs_pass_through() {
        let pts = [[0.0, 0.0], [10.0, 0.0], [3.0, 7.0]];
        let cs = mapped(&pts, &AffineTransform::new(1.2, 0.3, 5.0, -0.2, 0.9, -3.0));
        let out = remove_outliers(&cs).unwrap();
        assert!(out.removed.is_empty());
        assert_eq!(out.survivors, cs);
    }

    #[test]
    fn fewer_than_three_is_an_error() {
        let cs =
            CorrespondenceSet::from_pairs([([0.0, 0.0], [0.0, 0.0]), ([1.0, 0.0], [1.0, 0.0])]);
        assert!(matches!(
            remove_outliers(&cs),
            Err(Error::InsufficientCorrespondences { .. })
        ));
        assert!(classify(&cs).is_err());
    }

    #[test]
    fn mirrored_triangle_is_degenerate() {
        let pts = [[0.0, 0.0], [10.0, 0.0], [3.0, 7.0]];
        let cs = mapped(&pts, &AffineTransform::linear(1.0, 0.0, 0.0, -1.0));
        let out = remove_outliers(&cs).unwrap();
        assert!(out.degenerate);
        assert_eq!(out.removed.len(), 3);
    }

    #[test]
    fn sign_table_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 2]> = (0..10)
            .map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)])
            .collect();
        let same = CorrespondenceSet::from_pairs(pts.iter().map(|&p| (p, p)));
        let rot = mapped(&pts, &AffineTransform::rotation(73.0).about(50.0, 50.0));
        let mirror = CorrespondenceSet::from_pairs(pts.iter().map(|&p| (p, [p[0], -p[1]])));
        let (ts, tr, tm) = (
            classify(&same).unwrap(),
            classify(&rot).unwrap(),
            classify(&mirror).unwrap(),
        );
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    if i == j || k == i || k == j {
                        continue;
                    }
                    assert_eq!(ts.sign_ref(i, j, k), ts.sign_sensed(i, j, k));
                    assert_eq!(tr.sign_ref(i, j, k), tr.sign_sensed(i, j, k));
                    assert_eq!(tm.sign_ref(i, j, k), -tm.sign_sensed(i, j, k));
                    assert_eq!(ts.sign_ref(i, j, k), -ts.sign_ref(j, i, k));
                    assert_eq!(ts.sign_ref(i, j, k), edge_sign(pts[i], pts[j], pts[k]));
                }
            }
        }
    }

    #[test]
    fn removal_csv_layout() {
        let t = AffineTransform::rotation(-35.0).about(50.0, 50.0);
        let mut cs = mapped(&six_points(), &t);
        cs.push([62.0, 42.0], t.apply_point([20.0, 40.0]));
        let out = remove_outliers(&cs).unwrap();
        let mut buf = Vec::new();
        out.write_removal_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("iteration,removed_index,S_value"));
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,6,"), "{row}");
        assert_eq!(lines.next(), None);
    }
}
