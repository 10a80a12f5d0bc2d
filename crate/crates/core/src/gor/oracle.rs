use super::ledger::DisparityLedger;
use super::predicate::GRID_SCALE;
use crate::correspondence::CorrespondenceSet;
use crate::error::{Error, Result};

/// Largest set the cubic oracle accepts.
pub const ORACLE_MAX_N: usize = 12;

/// Full cofactor expansion of `|x_i x_j x_k; y_i y_j y_k; 1 1 1|` along the
/// bottom row, on grid integers.
fn homogeneous_det(pi: (i128, i128), pj: (i128, i128), pk: (i128, i128)) -> i128 {
    let m = [[pi.0, pj.0, pk.0], [pi.1, pj.1, pk.1], [1, 1, 1]];
    m[2][0] * (m[0][1] * m[1][2] - m[0][2] * m[1][1])
        - m[2][1] * (m[0][0] * m[1][2] - m[0][2] * m[1][0])
        + m[2][2] * (m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

fn to_grid(p: [f64; 2]) -> (i128, i128) {
    (
        (p[0] * GRID_SCALE).round() as i64 as i128,
        (p[1] * GRID_SCALE).round() as i64 as i128,
    )
}

/// Every `diff(i -> j, k)` by a direct triple loop with a fresh determinant per
/// triple. Independent of the indexed path; meant for checking it.
pub fn brute_force_oracle(cs: &CorrespondenceSet) -> Result<DisparityLedger> {
    let n = cs.len();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge(n));
    }
    let p: Vec<_> = cs.ref_points().iter().map(|&v| to_grid(v)).collect();
    let q: Vec<_> = cs.sensed_points().iter().map(|&v| to_grid(v)).collect();
    let mut per_edge = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let sp = homogeneous_det(p[i], p[j], p[k]).signum();
                let sq = homogeneous_det(q[i], q[j], q[k]).signum();
                if sp != sq {
                    per_edge[i * n + j] += 1;
                }
            }
        }
    }
    Ok(DisparityLedger::from_parts(n, per_edge))
}
