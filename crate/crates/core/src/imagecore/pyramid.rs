use rayon::prelude::*;

use super::GrayImage;
use crate::error::{Error, Result};

/// Box-averages `img` over `2^level x 2^level` windows.
///
/// Border windows that hang off the image average only the pixels they cover,
/// so the output is `ceil(w / 2^level) x ceil(h / 2^level)`.
pub fn downsample(img: &GrayImage, level: u32) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if level >= usize::BITS || (1usize << level) > w.min(h) {
        return Err(Error::LevelTooLarge {
            level,
            width: w,
            height: h,
        });
    }
    if level == 0 {
        return Ok(img.clone());
    }
    let win = 1usize << level;
    let (ow, oh) = (w.div_ceil(win), h.div_ceil(win));
    let data: Vec<f64> = (0..oh)
        .into_par_iter()
        .flat_map_iter(|oy| {
            (0..ow).map(move |ox| {
                let (x0, y0) = (ox * win, oy * win);
                let (x1, y1) = ((x0 + win).min(w), (y0 + win).min(h));
                let mut sum = 0.0;
                for y in y0..y1 {
                    sum += img.data()[y * w + x0..y * w + x1].iter().sum::<f64>();
                }
                sum / ((x1 - x0) * (y1 - y0)) as f64
            })
        })
        .collect();
    Ok(GrayImage::from_raw_unchecked(ow, oh, data))
}
