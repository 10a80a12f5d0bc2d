use crate::imagecore::{angular_distance, wrap_degrees, GradientField};

/// A growing region: its pixels plus running sums of the members' level-line
/// angle sines and cosines, from which the region angle is read.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionState {
    pub members: Vec<(usize, usize)>,
    pub sum_sin: f64,
    pub sum_cos: f64,
}

impl RegionState {
    pub fn seeded(pixel: (usize, usize), angle_deg: f64) -> Self {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Self {
            members: vec![pixel],
            sum_sin: s,
            sum_cos: c,
        }
    }

    pub fn push(&mut self, pixel: (usize, usize), angle_deg: f64) {
        let (s, c) = angle_deg.to_radians().sin_cos();
        self.members.push(pixel);
        self.sum_sin += s;
        self.sum_cos += c;
    }

    /// Region angle in degrees, `[0, 360)`.
    pub fn angle(&self) -> f64 {
        wrap_degrees(self.sum_sin.atan2(self.sum_cos).to_degrees())
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sums of sines and cosines recomputed from scratch over the members.
    pub fn recomputed_sums(&self, field: &GradientField) -> (f64, f64) {
        self.members.iter().fold((0.0, 0.0), |(s, c), &(x, y)| {
            let a = field
                .level_line_angle(x, y)
                .expect("region members have defined angles")
                .to_radians();
            (s + a.sin(), c + a.cos())
        })
    }
}

/// One accepted neighbor, with the region angle it was compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinEvent {
    pub pixel: (usize, usize),
    pub pixel_angle: f64,
    pub region_angle: f64,
}

const NEIGHBORS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Groups 8-connected pixels whose level-line angle is within `tau` degrees of
/// the running region angle. Seeds are visited in decreasing gradient magnitude;
/// regions with fewer than `min_region_size` pixels are dropped.
pub fn grow_regions(field: &GradientField, tau: f64, min_region_size: usize) -> Vec<RegionState> {
    grow(field, tau, min_region_size, None)
}

/// Like [`grow_regions`], also returning the join log of every kept region.
pub fn grow_regions_traced(
    field: &GradientField,
    tau: f64,
    min_region_size: usize,
) -> (Vec<RegionState>, Vec<Vec<JoinEvent>>) {
    let mut traces = Vec::new();
    let regions = grow(field, tau, min_region_size, Some(&mut traces));
    (regions, traces)
}

/// Defined pixels ordered by decreasing magnitude, ties by raster index.
fn seed_order(field: &GradientField) -> Vec<usize> {
    let w = field.width();
    let mut order: Vec<usize> = (0..w * field.height())
        .filter(|&i| field.is_defined(i % w, i / w))
        .collect();
    order.sort_by(|&i, &j| {
        field
            .magnitude(j % w, j / w)
            .total_cmp(&field.magnitude(i % w, i / w))
            .then(i.cmp(&j))
    });
    order
}

fn grow(
    field: &GradientField,
    tau: f64,
    min_region_size: usize,
    mut traces: Option<&mut Vec<Vec<JoinEvent>>>,
) -> Vec<RegionState> {
    let (w, h) = (field.width(), field.height());
    let mut used = vec![false; w * h];
    let mut regions = Vec::new();

    for seed in seed_order(field) {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let (sx, sy) = (seed % w, seed / w);
        let seed_angle = field.level_line_angle(sx, sy).expect("seeds are defined");
        let mut region = RegionState::seeded((sx, sy), seed_angle);
        let mut log = Vec::new();

        let mut cursor = 0;
        while cursor < region.members.len() {
            let (px, py) = region.members[cursor];
            cursor += 1;
            for (dx, dy) in NEIGHBORS {
                let (nx, ny) = (px as isize + dx, py as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                let idx = ny * w + nx;
                if used[idx] {
                    continue;
                }
                let Some(angle) = field.level_line_angle(nx, ny) else {
                    continue;
                };
                let region_angle = region.angle();
                if angular_distance(angle, region_angle) < tau {
                    used[idx] = true;
                    region.push((nx, ny), angle);
                    if traces.is_some() {
                        log.push(JoinEvent {
                            pixel: (nx, ny),
                            pixel_angle: angle,
                            region_angle,
                        });
                    }
                }
            }
        }

        if region.len() >= min_region_size {
            if let Some(t) = traces.as_deref_mut() {
                t.push(log);
            }
            regions.push(region);
        }
    }
    regions
}
