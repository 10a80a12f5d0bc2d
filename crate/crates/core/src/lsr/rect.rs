use serde::{Deserialize, Serialize};

use super::RegionState;
use crate::imagecore::{angular_distance, wrap_degrees, GradientField};

/// Rectangle approximation of a line-support region, in pixel-index
/// coordinates (pixel `(x, y)` is the point `(x, y)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSupportRegion {
    pub cx: f64,
    pub cy: f64,
    /// Direction of the long axis in degrees, `[0, 360)`.
    pub angle: f64,
    pub length: f64,
    pub width: f64,
    pub member_count: usize,
}

impl LineSupportRegion {
    /// Whether `(x, y)` lies inside the rectangle (boundary included).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.angle.to_radians().sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let along = dx * c + dy * s;
        let across = -dx * s + dy * c;
        along.abs() <= self.length / 2.0 && across.abs() <= self.width / 2.0
    }

    /// The four corners, counter-clockwise in the rectangle's own frame.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let (s, c) = self.angle.to_radians().sin_cos();
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
            .map(|(u, v)| (self.cx + u * c - v * s, self.cy + u * s + v * c))
    }
}

/// Fits a rectangle to a region from its magnitude-weighted moments.
///
/// The center is the weighted centroid and the long axis is the direction of
/// largest weighted variance, oriented to agree with the region angle. Extents
/// are the member projections on each axis, padded by half a pixel per side.
pub fn rectangle_approx(region: &RegionState, field: &GradientField) -> LineSupportRegion {
    assert!(!region.is_empty(), "rectangle of an empty region");
    let mut weights: Vec<f64> = region
        .members
        .iter()
        .map(|&(x, y)| field.magnitude(x, y))
        .collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        weights.iter_mut().for_each(|w| *w = 1.0);
    }
    let total: f64 = weights.iter().sum();
    let pts = || {
        region
            .members
            .iter()
            .map(|&(x, y)| (x as f64, y as f64))
            .zip(weights.iter())
    };

    let (mut cx, mut cy) = (0.0, 0.0);
    for ((x, y), w) in pts() {
        cx += w * x;
        cy += w * y;
    }
    cx /= total;
    cy /= total;

    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for ((x, y), w) in pts() {
        let (dx, dy) = (x - cx, y - cy);
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    let mut axis = 0.5 * (2.0 * sxy).atan2(sxx - syy).to_degrees();
    if sxx == syy && sxy == 0.0 {
        // Isotropic moments leave the axis free; take the region angle.
        axis = region.angle();
    }

    let extents = |deg: f64| {
        let (s, c) = deg.to_radians().sin_cos();
        let (mut lo_a, mut hi_a, mut lo_b, mut hi_b) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &region.members {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let a = dx * c + dy * s;
            let b = -dx * s + dy * c;
            lo_a = lo_a.min(a);
            hi_a = hi_a.max(a);
            lo_b = lo_b.min(b);
            hi_b = hi_b.max(b);
        }
        (hi_a - lo_a + 1.0, hi_b - lo_b + 1.0)
    };
    let (mut length, mut width) = extents(axis);
    if width > length {
        axis += 90.0;
        std::mem::swap(&mut length, &mut width);
    }
    let mut angle = wrap_degrees(axis);
    if angular_distance(angle, region.angle()) > 90.0 {
        angle = wrap_degrees(angle + 180.0);
    }

    LineSupportRegion {
        cx,
        cy,
        angle,
        length,
        width,
        member_count: region.len(),
    }
}
