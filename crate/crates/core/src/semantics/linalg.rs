//! Dense helpers shared by both backends. Multi-system indices are row-major:
//! the first system is the most significant digit.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

/// Field of matrix entries: `f64` for stochastic maps, `Complex64` for
/// transfer matrices.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

pub fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Split a flat index into per-system digits.
pub(crate) fn digits(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
    out
}

/// For every flat index of the permuted layout (new leg `q` = old leg
/// `perm[q]`), the flat index in the original layout.
pub(crate) fn permutation_table(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    (0..product(dims))
        .map(|flat| {
            digits(flat, &new_dims)
                .iter()
                .zip(perm)
                .map(|(&d, &p)| d * old_strides[p])
                .sum()
        })
        .collect()
}

pub(crate) fn permute_rows<T: Scalar>(m: &DMatrix<T>, dims: &[usize], perm: &[usize]) -> DMatrix<T> {
    let table = permutation_table(dims, perm);
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(table[i], j)])
}

pub(crate) fn permute_cols<T: Scalar>(m: &DMatrix<T>, dims: &[usize], perm: &[usize]) -> DMatrix<T> {
    let table = permutation_table(dims, perm);
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, table[j])])
}

pub(crate) fn identity<T: Scalar>(n: usize) -> DMatrix<T> {
    DMatrix::identity(n, n)
}

/// Permutation matrix sending `(a, b)` to `(b, a)`.
pub(crate) fn swap_matrix<T: Scalar>(da: usize, db: usize) -> DMatrix<T> {
    let n = da * db;
    let mut m = DMatrix::zeros(n, n);
    for a in 0..da {
        for b in 0..db {
            m[(b * da + a, a * db + b)] = T::one();
        }
    }
    m
}

pub fn max_abs_diff<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(0.0, f64::max)
}

/// Apply `op` to the legs at `positions` of the row space of `m`. The
/// untouched legs keep their order and the outputs of `op` are appended
/// after them.
pub(crate) fn apply_to_legs<T: Scalar>(
    m: &DMatrix<T>,
    leg_dims: &[usize],
    positions: &[usize],
    op: &DMatrix<T>,
) -> DMatrix<T> {
    let st = strides(leg_dims);
    let rest: Vec<usize> = (0..leg_dims.len()).filter(|k| !positions.contains(k)).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&k| leg_dims[k]).collect();
    let in_dims: Vec<usize> = positions.iter().map(|&k| leg_dims[k]).collect();
    let (rest_count, k_count) = (product(&rest_dims), product(&in_dims));
    debug_assert_eq!(op.ncols(), k_count);
    let base: Vec<usize> = (0..rest_count)
        .map(|r| digits(r, &rest_dims).iter().zip(&rest).map(|(d, &k)| d * st[k]).sum())
        .collect();
    let koff: Vec<usize> = (0..k_count)
        .map(|r| digits(r, &in_dims).iter().zip(positions).map(|(d, &k)| d * st[k]).sum())
        .collect();
    let out_count = op.nrows();
    let cols = m.ncols();
    let mut result = DMatrix::zeros(rest_count * out_count, cols);
    let mut block = DMatrix::zeros(k_count, cols);
    for (r, &b) in base.iter().enumerate() {
        for (k, &o) in koff.iter().enumerate() {
            block.row_mut(k).copy_from(&m.row(b + o));
        }
        let applied = op * &block;
        result
            .rows_mut(r * out_count, out_count)
            .copy_from(&applied);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_matrix_is_an_involution_up_to_transpose() {
        let s = swap_matrix::<f64>(2, 3);
        let back = swap_matrix::<f64>(3, 2);
        assert_eq!(&back * &s, DMatrix::identity(6, 6));
    }

    #[test]
    fn permutation_table_matches_swap() {
        let t = permutation_table(&[2, 3], &[1, 0]);
        let s = swap_matrix::<f64>(2, 3);
        for (new, &old) in t.iter().enumerate() {
            assert_eq!(s[(new, old)], 1.0);
        }
    }

    #[test]
    fn apply_to_single_leg_is_kronecker() {
        let m = DMatrix::<f64>::identity(4, 4);
        let op = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.9, 0.8]);
        // acting on leg 1 of (2, 2) with leg 0 untouched: I ⊗ op
        let got = apply_to_legs(&m, &[2, 2], &[1], &op);
        let want = DMatrix::<f64>::identity(2, 2).kronecker(&op);
        assert_eq!(got, want);
        // acting on leg 0, output appended after leg 1: (op ⊗ I) then swap
        let got = apply_to_legs(&m, &[2, 2], &[0], &op);
        let want = swap_matrix::<f64>(2, 2) * op.kronecker(&DMatrix::identity(2, 2));
        assert_eq!(got, want);
    }
}
