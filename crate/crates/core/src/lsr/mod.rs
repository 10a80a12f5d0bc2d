//! Line-support region segmentation.
//!
//! Pixels are grouped by level-line angle into connected regions, each region
//! is approximated by a rectangle, and the rectangles are rasterized into the
//! binary mask that feature detection runs on.

mod grow;
mod mask;
mod rect;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use grow::{grow_regions, grow_regions_traced, JoinEvent, RegionState};
pub use mask::{render_mask, SegmentationMask};
pub use rect::{rectangle_approx, LineSupportRegion};

use crate::error::{Error, Result};
use crate::imagecore::{compute_gradient_field, GrayImage, DEFAULT_FLAT_THRESHOLD};

/// Angle tolerance for region growing, in degrees.
pub const DEFAULT_TAU: f64 = 22.5;
pub const DEFAULT_MIN_REGION_SIZE: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub tau: f64,
    pub flat_threshold: f64,
    pub min_region_size: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            flat_threshold: DEFAULT_FLAT_THRESHOLD,
            min_region_size: DEFAULT_MIN_REGION_SIZE,
        }
    }
}

impl SegmentParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 180.0) {
            return Err(Error::InvalidParameter(format!(
                "tau {} not in (0, 180)",
                self.tau
            )));
        }
        if !(self.flat_threshold >= 0.0) {
            return Err(Error::InvalidParameter(
                "flat threshold must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: SegmentationMask,
    pub regions: Vec<LineSupportRegion>,
}

/// Gradient field, region growing, rectangle fitting and mask rendering in one pass.
pub fn segment(img: &GrayImage, params: &SegmentParams) -> Result<Segmentation> {
    params.validate()?;
    let field = compute_gradient_field(img, params.flat_threshold)?;
    let states = grow_regions(&field, params.tau, params.min_region_size.max(1));
    // The gradient at pixel (x, y) is measured at the centre of its 2x2 quad.
    let regions: Vec<LineSupportRegion> = states
        .iter()
        .map(|s| {
            let mut r = rectangle_approx(s, &field);
            r.cx += 0.5;
            r.cy += 0.5;
            r
        })
        .collect();
    let mask = render_mask(&regions, img.width(), img.height());
    Ok(Segmentation { mask, regions })
}

/// Writes `cx,cy,angle_deg,length,width,count` rows.
pub fn write_regions_csv(regions: &[LineSupportRegion], mut out: impl Write) -> Result<()> {
    writeln!(out, "cx,cy,angle_deg,length,width,count")?;
    for r in regions {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.cx, r.cy, r.angle, r.length, r.width, r.member_count
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::angular_distance;

    #[test]
    fn constant_image_segments_to_nothing() {
        let img = GrayImage::filled(32, 32, 0.6).unwrap();
        let seg = segment(&img, &SegmentParams::default()).unwrap();
        assert!(seg.regions.is_empty());
        assert_eq!(seg.mask.count_ones(), 0);
    }

    #[test]
    fn defaults() {
        let p = SegmentParams::default();
        assert_eq!(p.tau, 22.5);
        assert_eq!(p.min_region_size, 20);
        assert!((p.flat_threshold - 2.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn bright_bar_yields_aligned_region() {
        // A bar at 30 deg, about 3 px wide and 60 px long.
        let (s, c) = 30f64.to_radians().sin_cos();
        let img = GrayImage::from_fn(96, 96, |x, y| {
            let (dx, dy) = (x as f64 - 48.0, y as f64 - 48.0);
            let along = dx * c + dy * s;
            let across = -dx * s + dy * c;
            // Anti-aliased edges: one pixel of linear ramp on each side.
            let cover = (2.0 - across.abs()).clamp(0.0, 1.0) * (30.5 - along.abs()).clamp(0.0, 1.0);
            0.1 + 0.8 * cover
        })
        .unwrap();
        let seg = segment(&img, &SegmentParams::default()).unwrap();
        assert!(!seg.regions.is_empty());
        let aligned = seg.regions.iter().filter(|r| {
            angular_distance(r.angle, 30.0) < 22.5 || angular_distance(r.angle, 210.0) < 22.5
        });
        assert!(aligned.count() >= 1, "{:?}", seg.regions);
    }

    #[test]
    fn csv_header_and_rows() {
        let r = LineSupportRegion {
            cx: 1.5,
            cy: 2.0,
            angle: 90.0,
            length: 4.0,
            width: 1.0,
            member_count: 22,
        };
        let mut buf = Vec::new();
        write_regions_csv(&[r], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "cx,cy,angle_deg,length,width,count\n1.5,2,90,4,1,22\n");
    }

    #[test]
    fn invalid_tau_is_rejected() {
        let img = GrayImage::filled(8, 8, 0.0).unwrap();
        let p = SegmentParams {
            tau: 0.0,
            ..Default::default()
        };
        assert!(segment(&img, &p).is_err());
    }
}
