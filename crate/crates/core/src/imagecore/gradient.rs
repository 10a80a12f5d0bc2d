use rayon::prelude::*;

use super::GrayImage;
use crate::error::{Error, Result};

/// Default magnitude below which a pixel's angle is considered undefined (2/255).
pub const DEFAULT_FLAT_THRESHOLD: f64 = 2.0 / 255.0;

/// Per-pixel gradient magnitude and level-line angle (degrees, `[0, 360)`).
///
/// A pixel whose angle is `None` is either flat or on the last row/column.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    angle: Vec<Option<f64>>,
}

impl GradientField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn magnitude(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    #[inline]
    pub fn level_line_angle(&self, x: usize, y: usize) -> Option<f64> {
        self.angle[y * self.width + x]
    }

    pub fn is_defined(&self, x: usize, y: usize) -> bool {
        self.level_line_angle(x, y).is_some()
    }

    pub fn defined_count(&self) -> usize {
        self.angle.iter().filter(|a| a.is_some()).count()
    }

    /// Builds a field from explicit per-pixel values; used for synthetic fields.
    pub fn from_parts(
        width: usize,
        height: usize,
        magnitude: Vec<f64>,
        angle: Vec<Option<f64>>,
    ) -> Result<Self> {
        if magnitude.len() != width * height || angle.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "field buffers do not match {width}x{height}"
            )));
        }
        let angle = angle.into_iter().map(|a| a.map(wrap_degrees)).collect();
        Ok(Self {
            width,
            height,
            magnitude,
            angle,
        })
    }
}

/// Wraps an angle in degrees into `[0, 360)`.
pub fn wrap_degrees(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Circular distance between two angles in degrees, in `[0, 180]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Gradient over the 2x2 quad anchored at each pixel: `gx` is the right column
/// mean minus the left column mean, `gy` the bottom row mean minus the top row mean.
pub fn compute_gradient_field(img: &GrayImage, flat_threshold: f64) -> Result<GradientField> {
    let (w, h) = img.dims();
    if w < 2 || h < 2 {
        return Err(Error::ImageTooSmall(format!(
            "gradient needs at least 2x2, got {w}x{h}"
        )));
    }
    let rows: Vec<(Vec<f64>, Vec<Option<f64>>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut mags = vec![0.0; w];
            let mut angs = vec![None; w];
            if y + 1 < h {
                for x in 0..w - 1 {
                    let a = img.get(x, y);
                    let b = img.get(x + 1, y);
                    let c = img.get(x, y + 1);
                    let d = img.get(x + 1, y + 1);
                    let gx = ((b + d) - (a + c)) / 2.0;
                    let gy = ((c + d) - (a + b)) / 2.0;
                    let mag = gx.hypot(gy);
                    mags[x] = mag;
                    if mag >= flat_threshold && mag > 0.0 {
                        angs[x] = Some(wrap_degrees(gy.atan2(gx).to_degrees() + 90.0));
                    }
                }
            }
            (mags, angs)
        })
        .collect();
    let mut magnitude = Vec::with_capacity(w * h);
    let mut angle = Vec::with_capacity(w * h);
    for (m, a) in rows {
        magnitude.extend(m);
        angle.extend(a);
    }
    Ok(GradientField {
        width: w,
        height: h,
        magnitude,
        angle,
    })
}
