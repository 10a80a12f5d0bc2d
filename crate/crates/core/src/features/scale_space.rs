use rayon::prelude::*;

/// Real-valued raster used inside the scale space (values may be negative).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn sub(&self, other: &Plane) -> Plane {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Plane::new(self.width, self.height, data)
    }

    /// Bilinear 2x enlargement; output index `i` samples input at `i / 2`.
    pub fn upsample2(&self) -> Plane {
        let (w, h) = (self.width * 2, self.height * 2);
        let data = (0..h)
            .into_par_iter()
            .flat_map_iter(|y| {
                let sy = (y as f64 / 2.0).min((self.height - 1) as f64);
                let y0 = sy.floor() as usize;
                let y1 = (y0 + 1).min(self.height - 1);
                let fy = sy - y0 as f64;
                (0..w).map(move |x| {
                    let sx = (x as f64 / 2.0).min((self.width - 1) as f64);
                    let x0 = sx.floor() as usize;
                    let x1 = (x0 + 1).min(self.width - 1);
                    let fx = sx - x0 as f64;
                    let top = self.at(x0, y0) * (1.0 - fx) + self.at(x1, y0) * fx;
                    let bot = self.at(x0, y1) * (1.0 - fx) + self.at(x1, y1) * fx;
                    top * (1.0 - fy) + bot * fy
                })
            })
            .collect();
        Plane::new(w, h, data)
    }

    /// Keeps every other pixel in both directions.
    pub fn halve(&self) -> Plane {
        let (w, h) = (self.width / 2, self.height / 2);
        let data = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| self.at(2 * x, 2 * y))
            .collect();
        Plane::new(w, h, data)
    }

    pub fn blur(&self, sigma: f64) -> Plane {
        gaussian_blur(self, sigma)
    }
}

/// Mirror index without repeating the edge sample (`-1 -> 1`, `n -> n - 2`).
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    (if m >= n as isize { period - m } else { m }) as usize
}

fn kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with mirrored borders.
pub(crate) fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return src.clone();
    }
    let k = kernel(sigma);
    let r = (k.len() / 2) as isize;
    let (w, h) = (src.width, src.height);

    let horiz: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let row = &src.data[y * w..(y + 1) * w];
            let k = &k;
            (0..w).map(move |x| {
                k.iter()
                    .enumerate()
                    .map(|(t, kv)| kv * row[reflect(x as isize + t as isize - r, w)])
                    .sum::<f64>()
            })
        })
        .collect();

    let data: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let rows: Vec<usize> = (0..k.len())
                .map(|t| reflect(y as isize + t as isize - r, h))
                .collect();
            let k = &k;
            let horiz = &horiz;
            (0..w).map(move |x| {
                k.iter()
                    .zip(&rows)
                    .map(|(kv, &yy)| kv * horiz[yy * w + x])
                    .sum::<f64>()
            })
        })
        .collect();
    Plane::new(w, h, data)
}

/// Gaussian and difference-of-Gaussian stacks for every octave.
pub(crate) struct ScaleSpace {
    pub gauss: Vec<Vec<Plane>>,
    pub dog: Vec<Vec<Plane>>,
}

/// Builds `scales + 3` Gaussian layers per octave, the first one at blur `sigma0`,
/// from a base image already carrying `base_blur`.
pub(crate) fn build_scale_space(
    base: Plane,
    base_blur: f64,
    sigma0: f64,
    scales: usize,
    min_size: usize,
) -> ScaleSpace {
    let k = 2f64.powf(1.0 / scales as f64);
    let first = if sigma0 > base_blur {
        base.blur((sigma0 * sigma0 - base_blur * base_blur).sqrt())
    } else {
        base
    };
    // Incremental blur taking layer s - 1 to layer s.
    let steps: Vec<f64> = (1..scales + 3)
        .map(|s| {
            let prev = sigma0 * k.powi(s as i32 - 1);
            let next = prev * k;
            (next * next - prev * prev).sqrt()
        })
        .collect();

    let mut gauss: Vec<Vec<Plane>> = Vec::new();
    let mut seed = first;
    loop {
        if seed.width.min(seed.height) < min_size {
            break;
        }
        let mut layers = Vec::with_capacity(scales + 3);
        layers.push(seed);
        for &s in &steps {
            let next = layers.last().expect("nonempty").blur(s);
            layers.push(next);
        }
        seed = layers[scales].halve();
        gauss.push(layers);
    }
    let dog = gauss
        .iter()
        .map(|layers| layers.windows(2).map(|w| w[1].sub(&w[0])).collect())
        .collect();
    ScaleSpace { gauss, dog }
}
