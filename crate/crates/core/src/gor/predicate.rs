/// Sub-pixel resolution of the orientation grid: coordinates are snapped to
/// multiples of `1 / GRID_SCALE` pixels before any sign is taken.
pub const GRID_SCALE: f64 = 256.0;

/// A point on the `1/256`-pixel grid, stored as integer multiples of the grid step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub fn snap(p: [f64; 2]) -> Self {
        Self {
            x: (p[0] * GRID_SCALE).round() as i64,
            y: (p[1] * GRID_SCALE).round() as i64,
        }
    }

    pub fn to_f64(self) -> [f64; 2] {
        [self.x as f64 / GRID_SCALE, self.y as f64 / GRID_SCALE]
    }
}

/// Sign of `det [[xa, xb, xc], [ya, yb, yc], [1, 1, 1]]`, i.e. which side of the
/// directed edge `a -> b` the point `c` lies on: `+1` left, `-1` right, `0` on the line.
#[inline]
pub fn orientation(a: GridPoint, b: GridPoint, c: GridPoint) -> i8 {
    let (bx, by) = (b.x as i128 - a.x as i128, b.y as i128 - a.y as i128);
    let (cx, cy) = (c.x as i128 - a.x as i128, c.y as i128 - a.y as i128);
    (bx * cy - cx * by).signum() as i8
}

/// [`orientation`] on real coordinates, snapped to the grid first.
pub fn edge_sign(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> i8 {
    orientation(GridPoint::snap(a), GridPoint::snap(b), GridPoint::snap(c))
}
