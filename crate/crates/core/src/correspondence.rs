use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index-paired point lists: `ref_points[i]` in the reference image matches
/// `sensed_points[i]` in the sensed image.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSet {
    ref_points: Vec<[f64; 2]>,
    sensed_points: Vec<[f64; 2]>,
}

impl CorrespondenceSet {
    pub fn new(ref_points: Vec<[f64; 2]>, sensed_points: Vec<[f64; 2]>) -> Result<Self> {
        if ref_points.len() != sensed_points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} reference points vs {} sensed points",
                ref_points.len(),
                sensed_points.len()
            )));
        }
        Ok(Self {
            ref_points,
            sensed_points,
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = ([f64; 2], [f64; 2])>) -> Self {
        let (ref_points, sensed_points) = pairs.into_iter().unzip();
        Self {
            ref_points,
            sensed_points,
        }
    }

    pub fn len(&self) -> usize {
        self.ref_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ref_points.is_empty()
    }

    pub fn ref_points(&self) -> &[[f64; 2]] {
        &self.ref_points
    }

    pub fn sensed_points(&self) -> &[[f64; 2]] {
        &self.sensed_points
    }

    pub fn pair(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        (self.ref_points[i], self.sensed_points[i])
    }

    pub fn pairs(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.ref_points
            .iter()
            .copied()
            .zip(self.sensed_points.iter().copied())
    }

    pub fn push(&mut self, p: [f64; 2], q: [f64; 2]) {
        self.ref_points.push(p);
        self.sensed_points.push(q);
    }

    /// The pairs at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::from_pairs(indices.iter().map(|&i| self.pair(i)))
    }

    /// All coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[[f64; 2]]| v.iter().map(|p| [p[0] * factor, p[1] * factor]).collect();
        Self {
            ref_points: s(&self.ref_points),
            sensed_points: s(&self.sensed_points),
        }
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "px,py,qx,qy")?;
        for (p, q) in self.pairs() {
            writeln!(out, "{},{},{},{}", p[0], p[1], q[0], q[1])?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::InvalidParameter("empty correspondence file".into()))?;
        if header.trim() != "px,py,qx,qy" {
            return Err(Error::InvalidParameter(format!(
                "unexpected header {header:?}"
            )));
        }
        let mut set = Self::default();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidParameter(format!("row {}: {e}", n + 2)))?;
            if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "row {}: expected 4 finite values",
                    n + 2
                )));
            }
            set.push([vals[0], vals[1]], [vals[2], vals[3]]);
        }
        Ok(set)
    }
}
