use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar affine map `(x, y) -> (a*x + b*y + tx, c*x + d*y + ty)`.
///
/// Serialized as `{"a":..,"b":..,"tx":..,"c":..,"d":..,"ty":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub a: f64,
    pub b: f64,
    pub tx: f64,
    pub c: f64,
    pub d: f64,
    pub ty: f64,
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineTransform {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        tx: 0.0,
        c: 0.0,
        d: 1.0,
        ty: 0.0,
    };

    pub const fn new(a: f64, b: f64, tx: f64, c: f64, d: f64, ty: f64) -> Self {
        Self { a, b, tx, c, d, ty }
    }

    pub const fn translation(tx: f64, ty: f64) -> Self {
        Self::new(1.0, 0.0, tx, 0.0, 1.0, ty)
    }

    pub const fn scale(s: f64) -> Self {
        Self::new(s, 0.0, 0.0, 0.0, s, 0.0)
    }

    pub const fn linear(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a, b, 0.0, c, d, 0.0)
    }

    /// Rotation by `deg` degrees about the origin, positive from +x toward +y.
    /// In image coordinates (y pointing down) this appears clockwise on screen.
    pub fn rotation(deg: f64) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::linear(c, -s, s, c)
    }

    /// Shear with horizontal factor `h` and vertical factor `v`: linear part `[1, h; v, 1]`.
    pub const fn shear(h: f64, v: f64) -> Self {
        Self::linear(1.0, h, v, 1.0)
    }

    /// Conjugates the linear part so that it acts about `(cx, cy)` instead of the origin.
    pub fn about(self, cx: f64, cy: f64) -> Self {
        Self::translation(cx, cy)
            .compose(&self)
            .compose(&Self::translation(-cx, -cy))
    }

    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x + self.b * y + self.tx,
            self.c * x + self.d * y + self.ty,
        )
    }

    pub fn apply_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = self.apply(p[0], p[1]);
        [x, y]
    }

    pub fn linear_determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.tx, self.c, self.d, self.ty]
            .iter()
            .all(|v| v.is_finite())
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            tx: self.a * other.tx + self.b * other.ty + self.tx,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
            ty: self.c * other.tx + self.d * other.ty + self.ty,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.linear_determinant();
        if !det.is_finite() || det == 0.0 || !self.is_finite() {
            return Err(Error::NonInvertible);
        }
        let a = self.d / det;
        let b = -self.b / det;
        let c = -self.c / det;
        let d = self.a / det;
        Ok(Self {
            a,
            b,
            c,
            d,
            tx: -(a * self.tx + b * self.ty),
            ty: -(c * self.tx + d * self.ty),
        })
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a, self.b, self.tx, self.c, self.d, self.ty]
    }

    pub fn max_coefficient_diff(&self, other: &Self) -> f64 {
        self.coefficients()
            .iter()
            .zip(other.coefficients())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Largest displacement between `self` and `other` over the four corners of a
    /// `width x height` frame.
    pub fn max_corner_displacement(&self, other: &Self, width: f64, height: f64) -> f64 {
        [(0.0, 0.0), (width, 0.0), (0.0, height), (width, height)]
            .iter()
            .map(|&(x, y)| {
                let (ax, ay) = self.apply(x, y);
                let (bx, by) = other.apply(x, y);
                (ax - bx).hypot(ay - by)
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
