//! Dense Phase-I simplex for `A z = b, z >= 0` feasibility.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_TOL: f64 = 1e-11;

pub(crate) struct PhaseOne {
    /// Minimum of the summed artificial variables.
    pub objective: f64,
    /// Value of each row's artificial at the optimum (nonzero only when the
    /// row could not be satisfied).
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NotConverged;

/// Minimises the sum of one artificial per row using Bland's rule.
pub(crate) fn phase_one(a: &[Vec<f64>], b: &[f64]) -> Result<PhaseOne, NotConverged> {
    let m = a.len();
    if m == 0 {
        return Ok(PhaseOne { objective: 0.0, residuals: Vec::new() });
    }
    let n = a[0].len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][rhs] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs of the Phase-I objective.
    let mut cost = vec![0.0; width];
    for row in &t {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[rhs] -= row[rhs];
    }

    let max_iter = 10_000 + 50 * (n + m);
    for _ in 0..max_iter {
        let Some(enter) = (0..n + m).find(|&j| cost[j] < -PIVOT_TOL) else {
            let mut residuals = vec![0.0; m];
            let mut objective = 0.0;
            for (i, &bj) in basis.iter().enumerate() {
                if bj >= n {
                    residuals[bj - n] = t[i][rhs].max(0.0);
                    objective += t[i][rhs].max(0.0);
                }
            }
            return Ok(PhaseOne { objective, residuals });
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > PIVOT_TOL {
                let ratio = t[i][rhs] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[l]),
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // Phase-I is bounded below by zero, so an entering column always has
        // a positive entry unless the tableau has degraded numerically.
        let Some(r) = leave else { return Err(NotConverged) };
        let p = t[r][enter];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[enter];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = cost[enter];
        for (v, pv) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        basis[r] = enter;
    }
    Err(NotConverged)
}
