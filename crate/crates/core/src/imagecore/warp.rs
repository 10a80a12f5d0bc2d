use rayon::prelude::*;

use super::{AffineTransform, GrayImage};
use crate::error::{Error, Result};

// Geometric coordinates put pixel (i, j) over the unit square [i, i+1) x [j, j+1),
// so its center sits at (i + 0.5, j + 0.5).

/// Bilinear sample at continuous coordinates; `None` outside the sampled grid.
pub fn sample_bilinear(img: &GrayImage, x: f64, y: f64) -> Option<f64> {
    const SLACK: f64 = 1e-9;
    let (w, h) = img.dims();
    let u = x - 0.5;
    let v = y - 0.5;
    let (maxu, maxv) = ((w - 1) as f64, (h - 1) as f64);
    if !(u >= -SLACK && v >= -SLACK && u <= maxu + SLACK && v <= maxv + SLACK) {
        return None;
    }
    let u = u.clamp(0.0, maxu);
    let v = v.clamp(0.0, maxv);
    let x0 = u.floor() as usize;
    let y0 = v.floor() as usize;
    let fx = u - x0 as f64;
    let fy = v - y0 as f64;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
    let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Renders `src` through `t`: output pixel `(x, y)` takes `src` at `t⁻¹(x, y)`.
/// Samples falling outside `src` are 0.
pub fn warp_image(
    src: &GrayImage,
    t: &AffineTransform,
    out_width: usize,
    out_height: usize,
) -> Result<GrayImage> {
    if out_width == 0 || out_height == 0 {
        return Err(Error::ZeroDimension);
    }
    let inv = t.inverse()?;
    let data: Vec<f64> = (0..out_height)
        .into_par_iter()
        .flat_map_iter(|y| {
            (0..out_width).map(move |x| {
                let (sx, sy) = inv.apply(x as f64 + 0.5, y as f64 + 0.5);
                sample_bilinear(src, sx, sy).unwrap_or(0.0).clamp(0.0, 1.0)
            })
        })
        .collect();
    Ok(GrayImage::from_raw_unchecked(out_width, out_height, data))
}

/// Alternating `cell x cell` blocks, reference first at the origin.
pub fn checkerboard_mosaic(
    reference: &GrayImage,
    warped_sensed: &GrayImage,
    cell: usize,
) -> Result<GrayImage> {
    if reference.dims() != warped_sensed.dims() {
        return Err(Error::DimensionMismatch(format!(
            "mosaic inputs are {:?} and {:?}",
            reference.dims(),
            warped_sensed.dims()
        )));
    }
    if cell == 0 {
        return Err(Error::InvalidParameter("mosaic cell must be >= 1".into()));
    }
    let (w, h) = reference.dims();
    let data = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            if (x / cell + y / cell).is_multiple_of(2) {
                reference.get(x, y)
            } else {
                warped_sensed.get(x, y)
            }
        })
        .collect();
    Ok(GrayImage::from_raw_unchecked(w, h, data))
}
