use std::path::Path;

use super::LineSupportRegion;
use crate::error::Result;
use crate::imagecore::GrayImage;

/// Binary raster: `true` where a pixel center falls in some region rectangle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentationMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl SegmentationMask {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Paints one rectangle; bits are only ever set, never cleared.
    pub fn paint(&mut self, r: &LineSupportRegion) {
        if self.width == 0 || self.height == 0 {
            return;
        }
        let corners = r.corners();
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for (x, y) in corners {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        let clamp = |v: f64, hi: usize| v.max(0.0).min(hi as f64 - 1.0);
        if x1 < 0.0 || y1 < 0.0 || x0 > (self.width - 1) as f64 || y0 > (self.height - 1) as f64 {
            return;
        }
        let xs = clamp(x0.floor(), self.width) as usize..=clamp(x1.ceil(), self.width) as usize;
        let ys = clamp(y0.floor(), self.height) as usize..=clamp(y1.ceil(), self.height) as usize;
        for y in ys {
            for x in xs.clone() {
                if r.contains(x as f64, y as f64) {
                    self.bits[y * self.width + x] = true;
                }
            }
        }
    }

    /// 0/1 intensity image.
    pub fn to_image(&self) -> GrayImage {
        let data = self
            .bits
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect();
        GrayImage::new(self.width, self.height, data).expect("mask dimensions are nonzero")
    }

    /// PNG with values {0, 255}.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_image().save_png(path)
    }
}

pub fn render_mask(regions: &[LineSupportRegion], width: usize, height: usize) -> SegmentationMask {
    let mut mask = SegmentationMask::empty(width, height);
    for r in regions {
        mask.paint(r);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(cx: f64, cy: f64, angle: f64, length: f64, width: f64) -> LineSupportRegion {
        LineSupportRegion {
            cx,
            cy,
            angle,
            length,
            width,
            member_count: 1,
        }
    }

    #[test]
    fn no_regions_no_bits() {
        assert_eq!(render_mask(&[], 7, 4).count_ones(), 0);
    }

    #[test]
    fn axis_aligned_three_by_one() {
        let m = render_mask(&[rect(2.0, 2.0, 0.0, 3.0, 1.0)], 5, 5);
        let set: Vec<_> = (0..5)
            .flat_map(|y| (0..5).map(move |x| (x, y)))
            .filter(|&(x, y)| m.get(x, y))
            .collect();
        assert_eq!(set, vec![(1, 2), (2, 2), (3, 2)]);
    }

    /// Independent inside test: the point must be on the inner side of all
    /// four edges of the corner polygon.
    fn inside_polygon(r: &LineSupportRegion, x: f64, y: f64) -> bool {
        let (s, c) = r.angle.to_radians().sin_cos();
        let hl = r.length / 2.0;
        let hw = r.width / 2.0;
        let p = [
            (r.cx - hl * c + hw * s, r.cy - hl * s - hw * c),
            (r.cx + hl * c + hw * s, r.cy + hl * s - hw * c),
            (r.cx + hl * c - hw * s, r.cy + hl * s + hw * c),
            (r.cx - hl * c - hw * s, r.cy - hl * s + hw * c),
        ];
        (0..4).all(|i| {
            let (ax, ay) = p[i];
            let (bx, by) = p[(i + 1) % 4];
            (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= -1e-9
        })
    }

    #[test]
    fn overlapping_union_matches_brute_force() {
        let a = rect(10.3, 8.1, 33.0, 14.0, 3.2);
        let b = rect(12.0, 10.0, 101.0, 11.0, 2.5);
        let (w, h) = (25, 22);
        let m = render_mask(&[a, b], w, h);
        let mut expected = 0;
        for y in 0..h {
            for x in 0..w {
                let inside = inside_polygon(&a, x as f64, y as f64)
                    || inside_polygon(&b, x as f64, y as f64);
                if inside {
                    expected += 1;
                }
                assert_eq!(m.get(x, y), inside, "pixel ({x},{y})");
            }
        }
        assert_eq!(m.count_ones(), expected);
        assert!(expected > 40);
    }

    #[test]
    fn adding_a_region_never_clears() {
        let regs = [
            rect(5.0, 5.0, 10.0, 8.0, 2.0),
            rect(6.0, 9.0, 80.0, 6.0, 1.0),
            rect(-3.0, -3.0, 0.0, 2.0, 2.0),
            rect(14.0, 2.0, 145.0, 9.0, 3.0),
        ];
        let mut prev = render_mask(&[], 16, 12);
        for k in 1..=regs.len() {
            let next = render_mask(&regs[..k], 16, 12);
            for (p, n) in prev.bits().iter().zip(next.bits()) {
                assert!(!p || *n);
            }
            prev = next;
        }
    }
}
