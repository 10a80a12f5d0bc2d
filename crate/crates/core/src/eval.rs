//! Ground-truthed scoring and synthetic experiment generation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};
use crate::estimate::{fit_affine_lsm, FitResult};
use crate::features::scale_space::{gaussian_blur, Plane};
use crate::imagecore::{warp_image, AffineTransform, GrayImage};

/// Radius within which a match counts as correct.
pub const DEFAULT_INLIER_TOL: f64 = 2.0;
/// Residual norm above which a point counts as bad.
pub const BAD_POINT_NORM: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub transform: AffineTransform,
    pub inlier_tol: f64,
}

impl GroundTruth {
    pub fn new(transform: AffineTransform) -> Self {
        Self {
            transform,
            inlier_tol: DEFAULT_INLIER_TOL,
        }
    }

    pub fn is_correct(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        let [x, y] = self.transform.apply_point(p);
        (x - q[0]).hypot(y - q[1]) <= self.inlier_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingScore {
    pub initial_correct: usize,
    pub residual_correct: usize,
    pub residual_total: usize,
    /// 0 when no initial match is correct (see `recall_defined`).
    pub recall: f64,
    /// 0 when nothing survived (see `precision_defined`).
    pub precision: f64,
    pub recall_defined: bool,
    pub precision_defined: bool,
}

fn pair_key(p: [f64; 2], q: [f64; 2]) -> [u64; 4] {
    [
        p[0].to_bits(),
        p[1].to_bits(),
        q[0].to_bits(),
        q[1].to_bits(),
    ]
}

/// Recall and precision of `survivors` relative to the correct pairs of `initial`.
pub fn score_matching(
    initial: &CorrespondenceSet,
    survivors: &CorrespondenceSet,
    gt: &GroundTruth,
) -> Result<MatchingScore> {
    let mut available: HashMap<[u64; 4], usize> = HashMap::new();
    for (p, q) in initial.pairs() {
        *available.entry(pair_key(p, q)).or_default() += 1;
    }
    for (i, (p, q)) in survivors.pairs().enumerate() {
        match available.get_mut(&pair_key(p, q)) {
            Some(n) if *n > 0 => *n -= 1,
            _ => return Err(Error::SurvivorNotInInitial(i)),
        }
    }
    let initial_correct = initial
        .pairs()
        .filter(|&(p, q)| gt.is_correct(p, q))
        .count();
    let residual_correct = survivors
        .pairs()
        .filter(|&(p, q)| gt.is_correct(p, q))
        .count();
    let residual_total = survivors.len();
    let ratio = |a: usize, b: usize| if b > 0 { a as f64 / b as f64 } else { 0.0 };
    Ok(MatchingScore {
        initial_correct,
        residual_correct,
        residual_total,
        recall: ratio(residual_correct, initial_correct),
        precision: ratio(residual_correct, residual_total),
        recall_defined: initial_correct > 0,
        precision_defined: residual_total > 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistrationScore {
    pub n_red: usize,
    pub rms_all: f64,
    pub rms_loo: f64,
    pub bpp2: f64,
}

/// Leave-one-out residual norms: pair `k` scored against the fit without it.
pub fn leave_one_out_residuals(cs: &CorrespondenceSet) -> Result<Vec<f64>> {
    let n = cs.len();
    if n < 4 {
        return Err(Error::InsufficientCorrespondences { needed: 4, got: n });
    }
    (0..n)
        .into_par_iter()
        .map(|k| {
            let rest: Vec<usize> = (0..n).filter(|&i| i != k).collect();
            let fit = fit_affine_lsm(&cs.select(&rest))?;
            let (p, q) = cs.pair(k);
            let [x, y] = fit.transform.apply_point(p);
            Ok((x - q[0]).hypot(y - q[1]))
        })
        .collect()
}

pub fn score_registration(
    survivors: &CorrespondenceSet,
    fitted: &AffineTransform,
) -> Result<RegistrationScore> {
    let loo = leave_one_out_residuals(survivors)?;
    let n = loo.len();
    let rms_loo = (loo.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    let bad = loo.iter().filter(|&&r| r > BAD_POINT_NORM).count();
    Ok(RegistrationScore {
        n_red: n,
        rms_all: FitResult::evaluate(*fitted, survivors).rmse,
        rms_loo,
        bpp2: bad as f64 / n as f64,
    })
}

/// Reference is `src`; sensed is `src` rendered through `t` at the same size.
pub fn synthesize_pair(src: &GrayImage, t: &AffineTransform) -> Result<(GrayImage, GrayImage)> {
    let sensed = warp_image(src, t, src.width(), src.height())?;
    Ok((src.clone(), sensed))
}

/// Rotation by 120 degrees clockwise and scaling by 0.8 about the image centre.
pub fn rotation_scale_protocol(width: usize, height: usize) -> AffineTransform {
    AffineTransform::rotation(120.0)
        .compose(&AffineTransform::scale(0.8))
        .about(width as f64 / 2.0, height as f64 / 2.0)
}

/// Shear with `h = v = 0.1` about the image centre.
pub fn shear_protocol(width: usize, height: usize) -> AffineTransform {
    AffineTransform::shear(0.1, 0.1).about(width as f64 / 2.0, height as f64 / 2.0)
}

/// Appends `count` pairs drawn uniformly in `[0, w) x [0, h)` on both sides.
/// Returns the new set and the appended indices.
pub fn inject_outliers(
    cs: &CorrespondenceSet,
    count: usize,
    bounds: (usize, usize),
    seed: u64,
) -> (CorrespondenceSet, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (bounds.0 as f64, bounds.1 as f64);
    let mut out = cs.clone();
    let start = out.len();
    for _ in 0..count {
        let p = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
        let q = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
        out.push(p, q);
    }
    (out, (start..start + count).collect())
}

/// `n` uniformly random reference points mapped exactly through `t`.
pub fn exact_correspondences(
    t: &AffineTransform,
    n: usize,
    bounds: (usize, usize),
    seed: u64,
) -> CorrespondenceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (bounds.0 as f64, bounds.1 as f64);
    CorrespondenceSet::from_pairs((0..n).map(|_| {
        let p = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
        (p, t.apply_point(p))
    }))
}

/// Smallest `|det|` (twice the triangle area, px^2) accepted between any three
/// points by [`general_position_correspondences`]. Far above the effect of
/// snapping coordinates to the 1/256 px grid.
pub const MIN_TRIANGLE_DET: f64 = 16.0;

fn det(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Like [`exact_correspondences`], but every triple is kept away from
/// collinearity in both images, so orientation signs survive rounding.
pub fn general_position_correspondences(
    t: &AffineTransform,
    n: usize,
    bounds: (usize, usize),
    seed: u64,
) -> CorrespondenceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (bounds.0 as f64, bounds.1 as f64);
    let mut cs = CorrespondenceSet::default();
    while cs.len() < n {
        let p = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
        let q = t.apply_point(p);
        let (ps, qs) = (cs.ref_points(), cs.sensed_points());
        let ok = (0..ps.len()).all(|i| {
            (i + 1..ps.len()).all(|j| {
                det(ps[i], ps[j], p).abs() >= MIN_TRIANGLE_DET
                    && det(qs[i], qs[j], q).abs() >= MIN_TRIANGLE_DET
            })
        });
        if ok {
            cs.push(p, q);
        }
    }
    cs
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    /// Centre, half extents along and across, direction as (cos, sin).
    Rect {
        cx: f64,
        cy: f64,
        hl: f64,
        hw: f64,
        cos: f64,
        sin: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        cos: f64,
        sin: f64,
    },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect {
                cx,
                cy,
                hl,
                hw,
                cos,
                sin,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                (dx * cos + dy * sin).abs() <= hl && (-dx * sin + dy * cos).abs() <= hw
            }
            Shape::Ellipse {
                cx,
                cy,
                rx,
                ry,
                cos,
                sin,
            } => {
                let (dx, dy) = (x - cx, y - cy);
                let (u, v) = (dx * cos + dy * sin, -dx * sin + dy * cos);
                (u / rx).powi(2) + (v / ry).powi(2) <= 1.0
            }
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let (cx, cy, r) = match *self {
            Shape::Rect { cx, cy, hl, hw, .. } => (cx, cy, hl.hypot(hw)),
            Shape::Ellipse { cx, cy, rx, ry, .. } => (cx, cy, rx.max(ry)),
        };
        (cx - r, cy - r, cx + r, cy + r)
    }
}

const SUPERSAMPLE: usize = 4;
/// Gaussian point spread applied to the rendered scene.
pub const SCENE_PSF_SIGMA: f64 = 1.0;
/// Seed of the bundled acceptance scene.
pub const BUNDLED_SCENE_SEED: u64 = 1;

/// Deterministic textured test scene: a shaded background overlaid with
/// anti-aliased bars, blocks and ellipses of varied size and contrast, seen
/// through a Gaussian point spread.
pub fn synthetic_scene(width: usize, height: usize, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let scale = w.min(h) / 512.0;
    let mut shapes: Vec<(Shape, f64)> = Vec::new();
    let dir = |rng: &mut ChaCha8Rng| rng.gen_range(0.0..std::f64::consts::PI).sin_cos();
    for _ in 0..30 {
        let (sin, cos) = dir(&mut rng);
        let shape = Shape::Rect {
            cx: rng.gen_range(0.0..w),
            cy: rng.gen_range(0.0..h),
            hl: rng.gen_range(12.0..60.0) * scale,
            hw: rng.gen_range(8.0..40.0) * scale,
            cos,
            sin,
        };
        shapes.push((shape, rng.gen_range(0.05..0.95)));
    }
    for _ in 0..25 {
        let (sin, cos) = dir(&mut rng);
        let shape = Shape::Rect {
            cx: rng.gen_range(0.0..w),
            cy: rng.gen_range(0.0..h),
            hl: rng.gen_range(25.0..90.0) * scale,
            hw: rng.gen_range(1.5..4.0) * scale,
            cos,
            sin,
        };
        shapes.push((shape, rng.gen_range(0.05..0.95)));
    }
    for _ in 0..12 {
        let (sin, cos) = dir(&mut rng);
        let shape = Shape::Ellipse {
            cx: rng.gen_range(0.0..w),
            cy: rng.gen_range(0.0..h),
            rx: rng.gen_range(8.0..35.0) * scale,
            ry: rng.gen_range(5.0..25.0) * scale,
            cos,
            sin,
        };
        shapes.push((shape, rng.gen_range(0.05..0.95)));
    }
    let (gx, gy) = (rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15));

    let mut data: Vec<f64> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| 0.5 + gx * (x as f64 / w - 0.5) + gy * (y as f64 / h - 0.5))
        .collect();
    let ss = SUPERSAMPLE as f64;
    for (shape, value) in &shapes {
        let (x0, y0, x1, y1) = shape.bounds();
        let xs = (x0.floor().max(0.0) as usize)..((x1.ceil() + 1.0).min(w) as usize);
        let ys = (y0.floor().max(0.0) as usize)..((y1.ceil() + 1.0).min(h) as usize);
        for y in ys {
            for x in xs.clone() {
                let mut hits = 0;
                for sy in 0..SUPERSAMPLE {
                    for sx in 0..SUPERSAMPLE {
                        let px = x as f64 + (sx as f64 + 0.5) / ss;
                        let py = y as f64 + (sy as f64 + 0.5) / ss;
                        if shape.contains(px, py) {
                            hits += 1;
                        }
                    }
                }
                if hits > 0 {
                    let cover = hits as f64 / (ss * ss);
                    let v = &mut data[y * width + x];
                    *v = *v * (1.0 - cover) + value * cover;
                }
            }
        }
    }
    let plane = gaussian_blur(&Plane::new(width, height, data), SCENE_PSF_SIGMA);
    GrayImage::new(
        width,
        height,
        plane.data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
    )
}
