//! Dense phase-one simplex for `A w = b, w >= 0`.
//!
//! Pivots use the most negative reduced cost. After a run of degenerate
//! pivots the rule switches to Bland's for the rest of the solve, which
//! rules out cycling.

use nalgebra::{DMatrix, DVector};

const PIVOT_EPS: f64 = 1e-12;
/// Degenerate pivots in a row tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

/// Outcome of a phase-one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    /// Primal point, feasible for `w >= 0`; satisfies `A w = b` exactly when
    /// `infeasibility` is zero.
    pub w: DVector<f64>,
    /// Optimal value of the sum of artificial variables.
    pub infeasibility: f64,
    /// Dual vector `y` with `Aᵀ y <= 0` and `bᵀ y = infeasibility`.
    pub dual: DVector<f64>,
    pub pivots: usize,
}

/// Minimise the sum of artificials `s` subject to `A w + s = b`, `w, s >= 0`.
pub fn phase_one(a: &DMatrix<f64>, b: &DVector<f64>) -> PhaseOne {
    let (m, n) = a.shape();
    // rows with negative right-hand side are negated so the artificial
    // basis starts feasible; the dual is flipped back at the end
    let sign: Vec<f64> = b.iter().map(|&x| if x < 0.0 { -1.0 } else { 1.0 }).collect();
    let width = n + m + 1;
    let mut t = DMatrix::<f64>::zeros(m + 1, width);
    for i in 0..m {
        for j in 0..n {
            t[(i, j)] = sign[i] * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, width - 1)] = sign[i] * b[i];
    }
    // objective row holds reduced costs: c_j - c_Bᵀ B⁻¹ A_j with c = 1 on
    // artificials, and minus the objective value in the last column
    for j in 0..n {
        t[(m, j)] = -(0..m).map(|i| t[(i, j)]).sum::<f64>();
    }
    t[(m, width - 1)] = -(0..m).map(|i| t[(i, width - 1)]).sum::<f64>();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0;

    let mut bland = false;
    let mut stalled = 0;
    loop {
        // the objective is bounded below by 0, so reaching it is optimal
        if -t[(m, width - 1)] <= PIVOT_EPS {
            break;
        }
        let col = if bland {
            (0..n + m).find(|&j| t[(m, j)] < -PIVOT_EPS)
        } else {
            (0..n + m)
                .filter(|&j| t[(m, j)] < -PIVOT_EPS)
                .min_by(|&i, &j| t[(m, i)].total_cmp(&t[(m, j)]))
        };
        let Some(col) = col else {
            break;
        };
        let mut row: Option<(usize, f64)> = None;
        for i in 0..m {
            let aij = t[(i, col)];
            if aij > PIVOT_EPS {
                let ratio = t[(i, width - 1)] / aij;
                let better = match row {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[i] < basis[r])
                    }
                };
                if better {
                    row = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = row else {
            // unbounded direction cannot occur: the objective is bounded below by 0
            break;
        };
        let before = t[(m, width - 1)];
        pivot(&mut t, r, col);
        basis[r] = col;
        pivots += 1;
        if t[(m, width - 1)] > before + PIVOT_EPS {
            stalled = 0;
        } else {
            stalled += 1;
            bland |= stalled >= STALL_LIMIT;
        }
    }

    let mut w = DVector::zeros(n);
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            w[v] = t[(i, width - 1)].max(0.0);
        }
    }
    // reduced cost of artificial i is 1 - y_i (in the sign-adjusted rows)
    let dual = DVector::from_fn(m, |i, _| sign[i] * (1.0 - t[(m, n + i)]));
    PhaseOne {
        w,
        infeasibility: -t[(m, width - 1)],
        dual,
        pivots,
    }
}

fn pivot(t: &mut DMatrix<f64>, r: usize, c: usize) {
    let p = t[(r, c)];
    let row_r: Vec<f64> = t.row(r).iter().map(|x| x / p).collect();
    for (j, x) in row_r.iter().enumerate() {
        t[(r, j)] = *x;
    }
    for i in 0..t.nrows() {
        if i == r {
            continue;
        }
        let f = t[(i, c)];
        if f != 0.0 {
            for (j, x) in row_r.iter().enumerate() {
                t[(i, j)] -= f * x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system_is_solved() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![0.5, 0.75]);
        let s = phase_one(&a, &b);
        assert!(s.infeasibility.abs() < 1e-12);
        assert!((&a * &s.w - &b).amax() < 1e-12);
        assert!(s.w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn infeasible_system_has_farkas_dual() {
        // w1 + w2 = 1 and w1 + w2 = 2
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let s = phase_one(&a, &b);
        assert!((s.infeasibility - 1.0).abs() < 1e-12);
        assert!((a.transpose() * &s.dual).max() <= 1e-12);
        assert!((b.dot(&s.dual) - s.infeasibility).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_handled() {
        // -w = -0.5
        let a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let b = DVector::from_vec(vec![-0.5]);
        let s = phase_one(&a, &b);
        assert!((s.w[0] - 0.5).abs() < 1e-12);
    }
}
