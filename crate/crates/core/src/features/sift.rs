use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scale_space::{build_scale_space, Plane, ScaleSpace};
use crate::error::{Error, Result};
use crate::imagecore::{wrap_degrees, GrayImage};
use crate::lsr::SegmentationMask;

pub const DESCRIPTOR_LEN: usize = 128;

const IMAGE_BORDER: usize = 5;
const MAX_INTERP_STEPS: usize = 5;
const ORI_BINS: usize = 36;
const ORI_SIGMA_FACTOR: f64 = 1.5;
const ORI_PEAK_RATIO: f64 = 0.8;
const DESCR_WIDTH: usize = 4;
const DESCR_BINS: usize = 8;
const DESCR_SCALE_FACTOR: f64 = 3.0;
const DESCR_CLAMP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftParams {
    pub scales_per_octave: usize,
    /// Blur of the first layer of every octave.
    pub sigma: f64,
    /// Minimum |DoG| at the interpolated extremum, for intensities in `[0, 1]`.
    pub contrast_threshold: f64,
    /// Largest accepted ratio between principal curvatures.
    pub edge_ratio: f64,
    /// Blur applied to the binary mask before the scale space is built.
    pub mask_blur: f64,
    /// Blur already present in the input.
    pub input_blur: f64,
    /// Double the input before building the first octave.
    pub upsample: bool,
}

impl Default for SiftParams {
    fn default() -> Self {
        Self {
            scales_per_octave: 3,
            sigma: 1.6,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            mask_blur: 1.0,
            input_blur: 0.5,
            upsample: true,
        }
    }
}

/// A located, oriented feature. Positions use continuous pixel coordinates in
/// which pixel `(i, j)` covers `[i, i+1) x [j, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    /// Degrees in `[0, 360)`.
    pub orientation: f64,
    /// Mask value at the pixel containing the keypoint.
    pub mask_value: bool,
    pub response: f64,
}

/// Unit-norm 4x4x8 gradient histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor(pub [f64; DESCRIPTOR_LEN]);

impl Descriptor {
    pub fn distance(&self, other: &Descriptor) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub keypoint: Keypoint,
    pub descriptor: Descriptor,
}

/// A scale-space extremum before orientation assignment, in octave units.
#[derive(Debug, Clone, Copy)]
struct Extremum {
    octave: usize,
    layer: usize,
    x: usize,
    y: usize,
    /// Interpolated position and scale inside the octave.
    fx: f64,
    fy: f64,
    sigma: f64,
    response: f64,
}

/// Detects and describes features on the (slightly blurred) binary mask.
///
/// `img` is only used to check that the mask belongs to it.
pub fn detect_and_describe(
    img: &GrayImage,
    mask: &SegmentationMask,
    params: &SiftParams,
) -> Result<Vec<Feature>> {
    if img.dims() != mask.dims() {
        return Err(Error::DimensionMismatch(format!(
            "mask {:?} vs image {:?}",
            mask.dims(),
            img.dims()
        )));
    }
    let (w, h) = mask.dims();
    let plane = Plane::new(
        w,
        h,
        mask.bits()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    )
    .blur(params.mask_blur);
    let input_blur = (params.input_blur.powi(2) + params.mask_blur.powi(2)).sqrt();
    let mut features = describe_plane(plane, input_blur, params);
    for f in &mut features {
        let px = (f.keypoint.x.floor() as usize).min(w - 1);
        let py = (f.keypoint.y.floor() as usize).min(h - 1);
        f.keypoint.mask_value = mask.get(px, py);
    }
    Ok(features)
}

/// Detects and describes features directly on an intensity image.
pub fn detect_and_describe_image(img: &GrayImage, params: &SiftParams) -> Vec<Feature> {
    let plane = Plane::new(img.width(), img.height(), img.data().to_vec());
    describe_plane(plane, params.input_blur, params)
}

fn describe_plane(plane: Plane, input_blur: f64, params: &SiftParams) -> Vec<Feature> {
    let (base, base_blur, base_factor) = if params.upsample {
        (plane.upsample2(), 2.0 * input_blur, 0.5)
    } else {
        (plane, input_blur, 1.0)
    };
    let min_size = 2 * IMAGE_BORDER + 3;
    if base.width.min(base.height) < min_size {
        return Vec::new();
    }
    let ss = build_scale_space(
        base,
        base_blur,
        params.sigma,
        params.scales_per_octave,
        min_size,
    );

    let extrema: Vec<Extremum> = (0..ss.dog.len())
        .flat_map(|o| (1..=params.scales_per_octave).map(move |l| (o, l)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(o, l)| find_extrema(&ss, o, l, params))
        .collect();

    extrema
        .par_iter()
        .flat_map_iter(|e| {
            let gauss = &ss.gauss[e.octave][e.layer];
            let octave_factor = 2f64.powi(e.octave as i32) * base_factor;
            orientations(gauss, e)
                .into_iter()
                .filter_map(|ori| {
                    let descriptor = descriptor(gauss, e.fx, e.fy, e.sigma, ori)?;
                    Some(Feature {
                        keypoint: Keypoint {
                            x: e.fx * octave_factor + 0.5,
                            y: e.fy * octave_factor + 0.5,
                            scale: e.sigma * octave_factor,
                            orientation: ori,
                            mask_value: false,
                            response: e.response,
                        },
                        descriptor,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn find_extrema(
    ss: &ScaleSpace,
    octave: usize,
    layer: usize,
    params: &SiftParams,
) -> Vec<Extremum> {
    let dogs = &ss.dog[octave];
    let cur = &dogs[layer];
    let (w, h) = (cur.width, cur.height);
    let prefilter = 0.5 * params.contrast_threshold / params.scales_per_octave as f64;
    let mut out = Vec::new();
    for y in IMAGE_BORDER..h - IMAGE_BORDER {
        for x in IMAGE_BORDER..w - IMAGE_BORDER {
            let v = cur.at(x, y);
            if v.abs() <= prefilter || !is_local_extremum(dogs, layer, x, y) {
                continue;
            }
            if let Some(e) = localize(dogs, octave, layer, x, y, params) {
                out.push(e);
            }
        }
    }
    out
}

fn is_local_extremum(dogs: &[Plane], layer: usize, x: usize, y: usize) -> bool {
    let v = dogs[layer].at(x, y);
    let neighbors = (layer - 1..=layer + 1).flat_map(|l| {
        (y - 1..=y + 1).flat_map(move |yy| (x - 1..=x + 1).map(move |xx| (l, xx, yy)))
    });
    let mut ok = true;
    for (l, xx, yy) in neighbors {
        if l == layer && xx == x && yy == y {
            continue;
        }
        let n = dogs[l].at(xx, yy);
        if (v > 0.0 && n > v) || (v < 0.0 && n < v) {
            ok = false;
            break;
        }
    }
    ok
}

/// Quadratic refinement of a discrete extremum, then contrast and edge tests.
fn localize(
    dogs: &[Plane],
    octave: usize,
    mut layer: usize,
    mut x: usize,
    mut y: usize,
    params: &SiftParams,
) -> Option<Extremum> {
    let s = params.scales_per_octave;
    let (w, h) = (dogs[0].width, dogs[0].height);
    for _ in 0..MAX_INTERP_STEPS {
        let (prev, cur, next) = (&dogs[layer - 1], &dogs[layer], &dogs[layer + 1]);
        let g = [
            (cur.at(x + 1, y) - cur.at(x - 1, y)) / 2.0,
            (cur.at(x, y + 1) - cur.at(x, y - 1)) / 2.0,
            (next.at(x, y) - prev.at(x, y)) / 2.0,
        ];
        let v2 = 2.0 * cur.at(x, y);
        let dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - v2;
        let dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - v2;
        let dss = next.at(x, y) + prev.at(x, y) - v2;
        let dxy = (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1)
            + cur.at(x - 1, y - 1))
            / 4.0;
        let dxs =
            (next.at(x + 1, y) - next.at(x - 1, y) - prev.at(x + 1, y) + prev.at(x - 1, y)) / 4.0;
        let dys =
            (next.at(x, y + 1) - next.at(x, y - 1) - prev.at(x, y + 1) + prev.at(x, y - 1)) / 4.0;
        let hess = [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]];
        let offset = solve3(&hess, &[-g[0], -g[1], -g[2]])?;

        if offset.iter().all(|o| o.abs() < 0.5) {
            let contrast =
                cur.at(x, y) + 0.5 * (g[0] * offset[0] + g[1] * offset[1] + g[2] * offset[2]);
            if contrast.abs() < params.contrast_threshold {
                return None;
            }
            let tr = dxx + dyy;
            let det = dxx * dyy - dxy * dxy;
            let r = params.edge_ratio;
            if det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det {
                return None;
            }
            let sigma = params.sigma * 2f64.powf((layer as f64 + offset[2]) / s as f64);
            return Some(Extremum {
                octave,
                layer,
                x,
                y,
                fx: x as f64 + offset[0],
                fy: y as f64 + offset[1],
                sigma,
                response: contrast.abs(),
            });
        }
        if offset
            .iter()
            .any(|o| !o.is_finite() || o.abs() > (w + h) as f64)
        {
            return None;
        }
        let nx = x as isize + offset[0].round() as isize;
        let ny = y as isize + offset[1].round() as isize;
        let nl = layer as isize + offset[2].round() as isize;
        if nl < 1
            || nl > s as isize
            || nx < IMAGE_BORDER as isize
            || ny < IMAGE_BORDER as isize
            || nx >= (w - IMAGE_BORDER) as isize
            || ny >= (h - IMAGE_BORDER) as isize
        {
            return None;
        }
        x = nx as usize;
        y = ny as usize;
        layer = nl as usize;
    }
    None
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        a[i][..3].copy_from_slice(&m[i]);
        a[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
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
    Some(x)
}

#[inline]
fn gradient(img: &Plane, x: usize, y: usize) -> (f64, f64) {
    (
        img.at(x + 1, y) - img.at(x - 1, y),
        img.at(x, y + 1) - img.at(x, y - 1),
    )
}

/// Dominant gradient directions (degrees) around an extremum.
fn orientations(img: &Plane, e: &Extremum) -> Vec<f64> {
    let sigma_w = ORI_SIGMA_FACTOR * e.sigma;
    let radius = (3.0 * sigma_w).round() as isize;
    let mut hist = [0.0f64; ORI_BINS];
    let (cx, cy) = (e.x as isize, e.y as isize);
    for dy in -radius..=radius {
        let y = cy + dy;
        if y <= 0 || y >= img.height as isize - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let x = cx + dx;
            if x <= 0 || x >= img.width as isize - 1 {
                continue;
            }
            let (gx, gy) = gradient(img, x as usize, y as usize);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let weight = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_w * sigma_w)).exp();
            let ang = wrap_degrees(gy.atan2(gx).to_degrees());
            let bin = ((ang * ORI_BINS as f64 / 360.0).round() as usize) % ORI_BINS;
            hist[bin] += weight * mag;
        }
    }
    let n = ORI_BINS;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            (hist[(i + n - 2) % n] + hist[(i + 2) % n]) / 16.0
                + (hist[(i + n - 1) % n] + hist[(i + 1) % n]) * 4.0 / 16.0
                + hist[i] * 6.0 / 16.0
        })
        .collect();
    let max = smooth.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    (0..n)
        .filter_map(|i| {
            let (l, c, r) = (smooth[(i + n - 1) % n], smooth[i], smooth[(i + 1) % n]);
            if c > l && c > r && c >= ORI_PEAK_RATIO * max {
                let shift = 0.5 * (l - r) / (l - 2.0 * c + r);
                Some(wrap_degrees((i as f64 + shift) * 360.0 / n as f64))
            } else {
                None
            }
        })
        .collect()
}

/// 4x4 spatial cells x 8 orientation bins, trilinearly interpolated, in the
/// frame of the keypoint orientation. `None` for an all-zero patch.
fn descriptor(img: &Plane, fx: f64, fy: f64, sigma: f64, orientation: f64) -> Option<Descriptor> {
    let d = DESCR_WIDTH;
    let nb = DESCR_BINS;
    let cell = DESCR_SCALE_FACTOR * sigma;
    let radius = (cell * std::f64::consts::SQRT_2 * (d as f64 + 1.0) * 0.5).round() as isize;
    let radius = radius.min(((img.width.pow(2) + img.height.pow(2)) as f64).sqrt() as isize);
    let (sin_o, cos_o) = orientation.to_radians().sin_cos();
    let gauss_scale = -1.0 / (0.5 * (d * d) as f64);
    let (cx, cy) = (fx.round() as isize, fy.round() as isize);
    let (ox, oy) = (fx - cx as f64, fy - cy as f64);

    let mut hist = vec![0.0f64; (d + 2) * (d + 2) * nb];
    for dy in -radius..=radius {
        let y = cy + dy;
        if y <= 0 || y >= img.height as isize - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let x = cx + dx;
            if x <= 0 || x >= img.width as isize - 1 {
                continue;
            }
            let (sx, sy) = (dx as f64 - ox, dy as f64 - oy);
            let c_rot = (sx * cos_o + sy * sin_o) / cell;
            let r_rot = (-sx * sin_o + sy * cos_o) / cell;
            let rbin = r_rot + d as f64 / 2.0 - 0.5;
            let cbin = c_rot + d as f64 / 2.0 - 0.5;
            if rbin <= -1.0 || rbin >= d as f64 || cbin <= -1.0 || cbin >= d as f64 {
                continue;
            }
            let (gx, gy) = gradient(img, x as usize, y as usize);
            let mag = gx.hypot(gy);
            if mag == 0.0 {
                continue;
            }
            let rel = wrap_degrees(gy.atan2(gx).to_degrees() - orientation);
            let obin = rel * nb as f64 / 360.0;
            let weight = mag * ((c_rot * c_rot + r_rot * r_rot) * gauss_scale).exp();

            let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
            let (fr, fc, fo) = (rbin - r0, cbin - c0, obin - o0);
            let (r0, c0, o0) = (r0 as isize, c0 as isize, o0 as isize);
            for (ri, wr) in [(0, 1.0 - fr), (1, fr)] {
                for (ci, wc) in [(0, 1.0 - fc), (1, fc)] {
                    for (oi, wo) in [(0, 1.0 - fo), (1, fo)] {
                        let rr = (r0 + ri + 1) as usize;
                        let cc = (c0 + ci + 1) as usize;
                        let oo = ((o0 + oi) as usize) % nb;
                        hist[(rr * (d + 2) + cc) * nb + oo] += weight * wr * wc * wo;
                    }
                }
            }
        }
    }

    let mut out = [0.0f64; DESCRIPTOR_LEN];
    for r in 0..d {
        for c in 0..d {
            for o in 0..nb {
                out[(r * d + c) * nb + o] = hist[((r + 1) * (d + 2) + c + 1) * nb + o];
            }
        }
    }
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return None;
    }
    out.iter_mut()
        .for_each(|v| *v = (*v / norm).min(DESCR_CLAMP));
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    out.iter_mut().for_each(|v| *v /= norm);
    Some(Descriptor(out))
}
