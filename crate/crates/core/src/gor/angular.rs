use std::cmp::Ordering;

use super::predicate::GridPoint;

/// Rank reserved for points coinciding with the anchor.
const COINCIDENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dir {
    x: i128,
    y: i128,
}

impl Dir {
    fn between(from: GridPoint, to: GridPoint) -> Self {
        Self {
            x: to.x as i128 - from.x as i128,
            y: to.y as i128 - from.y as i128,
        }
    }

    fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
        }
    }

    /// Angle in `[pi, 2 pi)`.
    fn upper(self) -> bool {
        self.y < 0 || (self.y == 0 && self.x < 0)
    }

    fn cross(self, o: Self) -> i128 {
        self.x * o.y - self.y * o.x
    }
}

/// Exact counter-clockwise angular order starting at the +x axis.
fn cmp_dir(a: Dir, b: Dir) -> Ordering {
    a.upper().cmp(&b.upper()).then_with(|| 0.cmp(&a.cross(b)))
}

/// Where the directed edge `anchor -> j` and its reverse fall in the anchor's
/// angular order.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct EdgeFrame {
    pub rank: u32,
    /// Position of the reverse direction: first rank not before it.
    pub opp: u32,
    pub opp_present: bool,
    pub upper: bool,
    /// `j` coincides with the anchor; every point is then "on" the edge.
    pub degenerate: bool,
}

/// Interval `[lo, hi)` in rank space.
pub(crate) type RankRange = (u32, u32);

/// Per image: for every anchor point, the other points' ranks in the exact
/// angular order around the anchor, plus one [`EdgeFrame`] per directed edge.
///
/// Removing points never changes the relative order of the rest, so side
/// classifications stay readable from the ranks for the whole filtering run.
#[derive(Debug, Clone)]
pub(crate) struct AngularIndex {
    n: usize,
    ranks: Vec<u32>,
    frames: Vec<EdgeFrame>,
    distinct: Vec<u32>,
}

impl AngularIndex {
    pub fn build(points: &[GridPoint]) -> Self {
        let n = points.len();
        let mut ranks = vec![COINCIDENT; n * n];
        let mut frames = vec![EdgeFrame::default(); n * n];
        let mut distinct = vec![0u32; n];

        let mut order: Vec<(Dir, usize)> = Vec::with_capacity(n);
        let mut reps: Vec<Dir> = Vec::with_capacity(n);
        for i in 0..n {
            order.clear();
            reps.clear();
            order.extend(
                (0..n)
                    .filter(|&k| k != i)
                    .map(|k| (Dir::between(points[i], points[k]), k))
                    .filter(|(d, _)| !d.is_zero()),
            );
            order.sort_by(|a, b| cmp_dir(a.0, b.0));
            let row = &mut ranks[i * n..(i + 1) * n];
            for &(d, k) in order.iter() {
                if reps
                    .last()
                    .is_none_or(|&r| cmp_dir(r, d) != Ordering::Equal)
                {
                    reps.push(d);
                }
                row[k] = (reps.len() - 1) as u32;
            }
            distinct[i] = reps.len() as u32;

            for j in (0..n).filter(|&j| j != i) {
                let d = Dir::between(points[i], points[j]);
                let frame = &mut frames[i * n + j];
                if d.is_zero() {
                    frame.degenerate = true;
                    continue;
                }
                let back = d.neg();
                let opp = reps.partition_point(|&r| cmp_dir(r, back) == Ordering::Less);
                *frame = EdgeFrame {
                    rank: row[j],
                    opp: opp as u32,
                    opp_present: opp < reps.len() && cmp_dir(reps[opp], back) == Ordering::Equal,
                    upper: d.upper(),
                    degenerate: false,
                };
            }
        }
        Self {
            n,
            ranks,
            frames,
            distinct,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Number of distinct directions around `anchor`; the coincident class is
    /// mapped to this value when ranks are used as coordinates.
    pub fn distinct(&self, anchor: usize) -> u32 {
        self.distinct[anchor]
    }

    /// Rank of `k` around `anchor`, with coincident points mapped to `distinct(anchor)`.
    pub fn dense_rank(&self, anchor: usize, k: usize) -> u32 {
        let r = self.ranks[anchor * self.n + k];
        if r == COINCIDENT {
            self.distinct[anchor]
        } else {
            r
        }
    }

    /// Side of `k` relative to `i -> j`, read from the stored order.
    #[inline]
    pub fn sign(&self, i: usize, j: usize, k: usize) -> i8 {
        if i == j || k == i || k == j {
            return 0;
        }
        let f = self.frames[i * self.n + j];
        if f.degenerate {
            return 0;
        }
        let rk = self.ranks[i * self.n + k];
        if rk == COINCIDENT || rk == f.rank || (f.opp_present && rk == f.opp) {
            return 0;
        }
        let left = if f.upper {
            rk > f.rank || rk < f.opp
        } else {
            rk > f.rank && rk < f.opp
        };
        if left {
            1
        } else {
            -1
        }
    }

    /// Rank intervals holding the left, right and on-line classes of `i -> j`,
    /// over the dense rank space `[0, distinct(i)]`.
    pub fn classes(&self, i: usize, j: usize) -> [Vec<RankRange>; 3] {
        let dp = self.distinct[i];
        let f = self.frames[i * self.n + j];
        if f.degenerate {
            return [vec![], vec![], vec![(0, dp + 1)]];
        }
        let r = f.rank;
        let after_opp = f.opp + f.opp_present as u32;
        let mut zero = vec![(r, r + 1), (dp, dp + 1)];
        if f.opp_present {
            zero.push((f.opp, f.opp + 1));
        }
        let (left, right) = if f.upper {
            (vec![(r + 1, dp), (0, f.opp)], vec![(after_opp, r)])
        } else {
            (vec![(r + 1, f.opp)], vec![(after_opp, dp), (0, r)])
        };
        let keep = |v: Vec<RankRange>| v.into_iter().filter(|(a, b)| a < b).collect();
        [keep(left), keep(right), keep(zero)]
    }
}
