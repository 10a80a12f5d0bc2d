use rayon::prelude::*;

use super::angular::{AngularIndex, RankRange};
use super::predicate::GridPoint;
use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};

/// Side classifications of every point against every directed edge, in both
/// images. Signs are read from per-anchor angular orders built once, so a
/// lookup never re-evaluates a determinant.
#[derive(Debug, Clone)]
pub struct SignTable {
    reference: AngularIndex,
    sensed: AngularIndex,
}

impl SignTable {
    pub fn len(&self) -> usize {
        self.reference.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Side of `p_k` relative to `p_i -> p_j`.
    pub fn sign_ref(&self, i: usize, j: usize, k: usize) -> i8 {
        self.reference.sign(i, j, k)
    }

    /// Side of `q_k` relative to `q_i -> q_j`.
    pub fn sign_sensed(&self, i: usize, j: usize, k: usize) -> i8 {
        self.sensed.sign(i, j, k)
    }

    /// 1 when the two images classify `k` differently against the edge `i -> j`.
    #[inline]
    pub fn diff(&self, i: usize, j: usize, k: usize) -> u32 {
        (self.reference.sign(i, j, k) != self.sensed.sign(i, j, k)) as u32
    }

    /// Accumulated disparities over all points, computed anchor by anchor with
    /// an offline rank-space sweep in `O(n log n)` per anchor.
    pub fn ledger(&self) -> DisparityLedger {
        let n = self.len();
        let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|i| self.anchor_row(i)).collect();
        let mut per_edge = Vec::with_capacity(n * n);
        let mut per_point = Vec::with_capacity(n);
        for row in rows {
            per_point.push(row.iter().map(|&v| v as u64).sum());
            per_edge.extend(row);
        }
        DisparityLedger {
            n,
            live: vec![true; n],
            live_count: n,
            per_edge,
            per_point,
        }
    }

    /// `D[i][j]` for every `j`: the number of `k` whose side differs.
    ///
    /// Each other point becomes the 2-D point (rank around `p_i`, rank around
    /// `q_i`). For an edge, agreeing points are those inside one of the three
    /// products (left x left, right x right, on x on) of rank intervals, which
    /// are counted with prefix queries over a Fenwick tree.
    fn anchor_row(&self, i: usize) -> Vec<u32> {
        let n = self.len();
        let mut row = vec![0u32; n];
        if n < 2 {
            return row;
        }
        let dp = self.reference.distinct(i) as usize;
        let dq = self.sensed.distinct(i) as usize;
        let others = n - 1;

        // Points bucketed by reference rank.
        let mut by_x: Vec<Vec<u32>> = vec![Vec::new(); dp + 1];
        for k in (0..n).filter(|&k| k != i) {
            by_x[self.reference.dense_rank(i, k) as usize].push(self.sensed.dense_rank(i, k));
        }

        // Prefix queries P(X, Y) = #{x < X, y < Y}, bucketed by X.
        let mut queries: Vec<Vec<(u32, i32, u32)>> = vec![Vec::new(); dp + 2];
        let mut push_rect = |j: u32, xr: RankRange, yr: RankRange| {
            let (x0, x1) = xr;
            let (y0, y1) = yr;
            queries[x1 as usize].push((y1, 1, j));
            queries[x0 as usize].push((y1, -1, j));
            queries[x1 as usize].push((y0, -1, j));
            queries[x0 as usize].push((y0, 1, j));
        };
        for j in (0..n).filter(|&j| j != i) {
            let cp = self.reference.classes(i, j);
            let cq = self.sensed.classes(i, j);
            for (ps, qs) in cp.iter().zip(cq.iter()) {
                for &xr in ps {
                    for &yr in qs {
                        push_rect(j as u32, xr, yr);
                    }
                }
            }
        }

        let mut agree = vec![0i64; n];
        let mut fenwick = Fenwick::new(dq + 2);
        for x in 0..=dp + 1 {
            for &(y, w, j) in &queries[x] {
                agree[j as usize] += w as i64 * fenwick.prefix(y as usize) as i64;
            }
            if x <= dp {
                for &y in &by_x[x] {
                    fenwick.add(y as usize);
                }
            }
        }
        for j in (0..n).filter(|&j| j != i) {
            // `agree` includes j itself (on-line in both images).
            row[j] = (others as i64 - agree[j]) as u32;
        }
        row
    }
}

/// Snaps both point lists to the orientation grid and indexes them.
pub fn classify(cs: &CorrespondenceSet) -> Result<SignTable> {
    if cs.len() < 3 {
        return Err(Error::InsufficientCorrespondences {
            needed: 3,
            got: cs.len(),
        });
    }
    let snap = |pts: &[[f64; 2]]| pts.iter().map(|&p| GridPoint::snap(p)).collect::<Vec<_>>();
    let (r, s) = rayon::join(
        || AngularIndex::build(&snap(cs.ref_points())),
        || AngularIndex::build(&snap(cs.sensed_points())),
    );
    Ok(SignTable {
        reference: r,
        sensed: s,
    })
}

struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn add(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted positions `< end`.
    fn prefix(&self, end: usize) -> u32 {
        let mut i = end.min(self.tree.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Per-edge and per-point disparity counts over the live correspondences:
/// `D[i][j] = sum_k diff(i -> j, k)` and `S[i] = sum_j D[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisparityLedger {
    n: usize,
    live: Vec<bool>,
    live_count: usize,
    per_edge: Vec<u32>,
    per_point: Vec<u64>,
}

impl DisparityLedger {
    pub(crate) fn from_parts(n: usize, per_edge: Vec<u32>) -> Self {
        let per_point = (0..n)
            .map(|i| per_edge[i * n..(i + 1) * n].iter().map(|&v| v as u64).sum())
            .collect();
        Self {
            n,
            live: vec![true; n],
            live_count: n,
            per_edge,
            per_point,
        }
    }

    /// Total number of indices, live or removed.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn is_live(&self, i: usize) -> bool {
        self.live[i]
    }

    pub fn live_indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.live[i]).collect()
    }

    pub fn per_edge(&self, i: usize, j: usize) -> u32 {
        self.per_edge[i * self.n + j]
    }

    pub fn per_point(&self, i: usize) -> u64 {
        self.per_point[i]
    }

    pub fn per_point_all(&self) -> &[u64] {
        &self.per_point
    }

    pub fn is_all_zero(&self) -> bool {
        (0..self.n).all(|i| !self.live[i] || self.per_point[i] == 0)
    }

    /// Largest live `S[i]` and every live index attaining it.
    pub fn argmax(&self) -> (u64, Vec<usize>) {
        let max = (0..self.n)
            .filter(|&i| self.live[i])
            .map(|i| self.per_point[i])
            .max()
            .unwrap_or(0);
        let at = (0..self.n)
            .filter(|&i| self.live[i] && self.per_point[i] == max)
            .collect();
        (max, at)
    }

    /// Drops `r` and subtracts every disparity it contributed, either as the
    /// classified point or as the head of an edge. `O(n^2)` table lookups.
    pub fn remove(&mut self, table: &SignTable, r: usize) {
        assert!(self.live[r], "index {r} already removed");
        let n = self.n;
        self.live[r] = false;
        self.live_count -= 1;
        let live = &self.live;
        let updates: Vec<(usize, Vec<(usize, u32)>, u64)> = (0..n)
            .into_par_iter()
            .filter(|&i| live[i])
            .map(|i| {
                let mut edge_updates = Vec::new();
                let mut dec = 0u64;
                for j in (0..n).filter(|&j| j != i && live[j]) {
                    let d = table.diff(i, j, r);
                    if d != 0 {
                        edge_updates.push((j, d));
                        dec += d as u64;
                    }
                }
                (i, edge_updates, dec)
            })
            .collect();
        for (i, edge_updates, dec) in updates {
            for (j, d) in edge_updates {
                self.per_edge[i * n + j] -= d;
            }
            let head = self.per_edge[i * n + r] as u64;
            self.per_edge[i * n + r] = 0;
            self.per_point[i] -= dec + head;
        }
        self.per_edge[r * n..(r + 1) * n]
            .iter_mut()
            .for_each(|v| *v = 0);
        self.per_point[r] = 0;
    }

    /// The ledger restricted to live indices, re-indexed in increasing order.
    pub fn compacted(&self) -> DisparityLedger {
        let idx = self.live_indices();
        let m = idx.len();
        let mut per_edge = Vec::with_capacity(m * m);
        for &i in &idx {
            for &j in &idx {
                per_edge.push(self.per_edge(i, j));
            }
        }
        DisparityLedger::from_parts(m, per_edge)
    }
}
