//! Affine fitting by least squares, the resolution-scaled RMSE used as the
//! stopping statistic, and a RANSAC baseline.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};
use crate::imagecore::AffineTransform;

/// Smallest accepted `|det|` of the normalized normal matrix.
pub const RANK_EPS: f64 = 1e-9;
pub const DEFAULT_RANSAC_TOL: f64 = 1.0;
pub const DEFAULT_RANSAC_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub transform: AffineTransform,
    pub rmse: f64,
    /// Euclidean error of each correspondence, in input order.
    pub residuals: Vec<f64>,
}

impl FitResult {
    /// Residuals and RMSE of `transform` on `cs`.
    pub fn evaluate(transform: AffineTransform, cs: &CorrespondenceSet) -> Self {
        let residuals: Vec<f64> = cs
            .pairs()
            .map(|(p, q)| {
                let [x, y] = transform.apply_point(p);
                (x - q[0]).hypot(y - q[1])
            })
            .collect();
        let rmse = if residuals.is_empty() {
            0.0
        } else {
            (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt()
        };
        Self {
            transform,
            rmse,
            residuals,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `2^level * rmse`.
pub fn scaled_rmse(fit: &FitResult, level: u32) -> f64 {
    2f64.powi(level as i32) * fit.rmse
}

fn solve3(m: [[f64; 3]; 3], rhs: [f64; 3]) -> [f64; 3] {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty range");
        a.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..4 {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| a[i][j] * x[j]).sum();
        x[i] = (a[i][3] - s) / a[i][i];
    }
    x
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Least-squares affine map taking reference points onto sensed points.
pub fn fit_affine_lsm(cs: &CorrespondenceSet) -> Result<FitResult> {
    let n = cs.len();
    if n < 3 {
        return Err(Error::InsufficientCorrespondences { needed: 3, got: n });
    }
    // Centre the reference points and scale them into [-1, 1].
    let nf = n as f64;
    let (mx, my) = cs
        .ref_points()
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0] / nf, sy + p[1] / nf));
    let spread = cs
        .ref_points()
        .iter()
        .map(|p| (p[0] - mx).abs().max((p[1] - my).abs()))
        .fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(Error::DegenerateConfiguration(
            "all reference points coincide".into(),
        ));
    }
    let s = 1.0 / spread;

    let mut m = [[0.0; 3]; 3];
    let mut bx = [0.0; 3];
    let mut by = [0.0; 3];
    for (p, q) in cs.pairs() {
        let row = [s * (p[0] - mx), s * (p[1] - my), 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            bx[i] += row[i] * q[0];
            by[i] += row[i] * q[1];
        }
    }
    let normalized = m.map(|r| r.map(|v| v / nf));
    if det3(&normalized).abs() < RANK_EPS {
        return Err(Error::DegenerateConfiguration(
            "reference points are collinear".into(),
        ));
    }
    let [a, b, c0] = solve3(m, bx);
    let [c, d, c1] = solve3(m, by);
    let t = AffineTransform::new(
        a * s,
        b * s,
        c0 - a * s * mx - b * s * my,
        c * s,
        d * s,
        c1 - c * s * mx - d * s * my,
    );
    Ok(FitResult::evaluate(t, cs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RansacResult {
    pub fit: FitResult,
    pub inliers: Vec<bool>,
    /// Trial that produced the winning consensus set.
    pub trial: usize,
}

impl RansacResult {
    pub fn inlier_indices(&self) -> Vec<usize> {
        self.inliers
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Minimal-sample consensus followed by a least-squares refit on the winning
/// consensus set. Trial `t` draws from its own stream of a generator seeded by
/// `seed`, so results do not depend on scheduling.
pub fn fit_affine_ransac(
    cs: &CorrespondenceSet,
    inlier_tol: f64,
    iterations: usize,
    seed: u64,
) -> Result<RansacResult> {
    let n = cs.len();
    if n < 3 {
        return Err(Error::InsufficientCorrespondences { needed: 3, got: n });
    }
    let consensus = |t: &AffineTransform| -> Vec<bool> {
        cs.pairs()
            .map(|(p, q)| {
                let [x, y] = t.apply_point(p);
                (x - q[0]).hypot(y - q[1]) <= inlier_tol
            })
            .collect()
    };

    let best = (0..iterations.max(1))
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let idx = sample(&mut rng, n, 3).into_vec();
            let fit = fit_affine_lsm(&cs.select(&idx)).ok()?;
            let mask = consensus(&fit.transform);
            let count = mask.iter().filter(|&&b| b).count();
            Some((count, trial, mask))
        })
        .reduce_with(|a, b| {
            if (b.0, std::cmp::Reverse(b.1)) > (a.0, std::cmp::Reverse(a.1)) {
                b
            } else {
                a
            }
        });

    let (count, trial, inliers) = best.ok_or(Error::RansacFailed)?;
    if count < 3 {
        return Err(Error::RansacFailed);
    }
    let idx: Vec<usize> = (0..n).filter(|&i| inliers[i]).collect();
    let refit = fit_affine_lsm(&cs.select(&idx)).map_err(|_| Error::RansacFailed)?;
    Ok(RansacResult {
        fit: FitResult::evaluate(refit.transform, cs),
        inliers,
        trial,
    })
}
