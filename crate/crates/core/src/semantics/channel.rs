//! Finite-dimensional quantum channels.
//!
//! Choi convention: for a channel `Φ` from input systems (total dimension
//! `D`) to output systems (total dimension `E`),
//!
//! ```text
//! J = Σ_{i,i'} Φ(|i⟩⟨i'|) ⊗ |i⟩⟨i'|        on output ⊗ input,
//! J[(o,i),(o',i')] = ⟨o|Φ(|i⟩⟨i'|)|o'⟩
//! ```
//!
//! so trace preservation reads `Tr_out J = I_in`.
//!
//! Transfer (natural) representation: each wire of dimension `d` carries a
//! vectorised operator with index `k·d + l` for `ρ[k][l]`, and several wires
//! are laid out block by block (first wire most significant). With that
//! layout, sequential composition is the matrix product and parallel
//! composition the Kronecker product; the index shuffle is applied once, here.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::linalg::{digits, product};
use super::{MapClass, MapViolation, SemanticsError, TOL_EQ, TOL_PSD};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    choi: DMatrix<Complex64>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    transfer: DMatrix<Complex64>,
}

/// Index of the operator entry `(row, col)` (both composite indices over
/// `dims`) in the wire-blocked vectorisation.
pub(crate) fn blocked_index(dims: &[usize], row: usize, col: usize) -> usize {
    let r = digits(row, dims);
    let c = digits(col, dims);
    dims.iter()
        .zip(r.iter().zip(&c))
        .fold(0, |acc, (&d, (&a, &b))| acc * d * d + a * d + b)
}

fn blocked_table(dims: &[usize]) -> Vec<Vec<usize>> {
    let n = product(dims);
    (0..n)
        .map(|r| (0..n).map(|c| blocked_index(dims, r, c)).collect())
        .collect()
}

pub fn choi_to_transfer(
    choi: &DMatrix<Complex64>,
    in_dims: &[usize],
    out_dims: &[usize],
) -> DMatrix<Complex64> {
    let (din, dout) = (product(in_dims), product(out_dims));
    let ti = blocked_table(in_dims);
    let to = blocked_table(out_dims);
    let mut t = DMatrix::zeros(dout * dout, din * din);
    for o in 0..dout {
        for o2 in 0..dout {
            for i in 0..din {
                for i2 in 0..din {
                    t[(to[o][o2], ti[i][i2])] = choi[(o * din + i, o2 * din + i2)];
                }
            }
        }
    }
    t
}

pub fn transfer_to_choi(
    transfer: &DMatrix<Complex64>,
    in_dims: &[usize],
    out_dims: &[usize],
) -> DMatrix<Complex64> {
    let (din, dout) = (product(in_dims), product(out_dims));
    let ti = blocked_table(in_dims);
    let to = blocked_table(out_dims);
    let mut j = DMatrix::zeros(dout * din, dout * din);
    for o in 0..dout {
        for o2 in 0..dout {
            for i in 0..din {
                for i2 in 0..din {
                    j[(o * din + i, o2 * din + i2)] = transfer[(to[o][o2], ti[i][i2])];
                }
            }
        }
    }
    j
}

impl QuantumChannel {
    pub fn from_choi(
        choi: DMatrix<Complex64>,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
    ) -> Result<Self, SemanticsError> {
        let n = product(&in_dims) * product(&out_dims);
        if choi.shape() != (n, n) {
            return Err(SemanticsError::Shape(format!(
                "Choi matrix is {}x{}, expected {n}x{n}",
                choi.nrows(),
                choi.ncols()
            )));
        }
        let transfer = choi_to_transfer(&choi, &in_dims, &out_dims);
        Ok(QuantumChannel {
            choi,
            in_dims,
            out_dims,
            transfer,
        })
    }

    pub fn from_transfer(
        transfer: DMatrix<Complex64>,
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
    ) -> Result<Self, SemanticsError> {
        let (din, dout) = (product(&in_dims), product(&out_dims));
        if transfer.shape() != (dout * dout, din * din) {
            return Err(SemanticsError::Shape(format!(
                "transfer matrix is {}x{}, expected {}x{}",
                transfer.nrows(),
                transfer.ncols(),
                dout * dout,
                din * din
            )));
        }
        let choi = transfer_to_choi(&transfer, &in_dims, &out_dims);
        Ok(QuantumChannel {
            choi,
            in_dims,
            out_dims,
            transfer,
        })
    }

    /// Channel with Kraus operators `kraus` (each `E x D`).
    pub fn from_kraus(
        kraus: &[DMatrix<Complex64>],
        in_dims: Vec<usize>,
        out_dims: Vec<usize>,
    ) -> Result<Self, SemanticsError> {
        let (din, dout) = (product(&in_dims), product(&out_dims));
        let mut choi = DMatrix::zeros(din * dout, din * dout);
        for k in kraus {
            if k.shape() != (dout, din) {
                return Err(SemanticsError::Shape(format!(
                    "Kraus operator is {}x{}, expected {dout}x{din}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            // |K⟩⟩ with entry (o, i) = K[o, i]
            let v = DMatrix::from_fn(dout * din, 1, |r, _| k[(r / din, r % din)]);
            choi += &v * v.adjoint();
        }
        Self::from_choi(choi, in_dims, out_dims)
    }

    pub fn identity(d: usize) -> Self {
        let k = DMatrix::identity(d, d);
        Self::from_kraus(&[k], vec![d], vec![d]).expect("identity shapes agree")
    }

    /// Dephase the input, apply the stochastic map, and prepare the result
    /// diagonally: the embedding of classical processing into the quantum
    /// backend.
    pub fn dephased(stoch: &DMatrix<f64>, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Self {
        let (din, dout) = (product(&in_dims), product(&out_dims));
        assert_eq!(stoch.shape(), (dout, din), "stochastic map shape");
        let mut t = DMatrix::zeros(dout * dout, din * din);
        for o in 0..dout {
            for i in 0..din {
                t[(blocked_index(&out_dims, o, o), blocked_index(&in_dims, i, i))] =
                    Complex64::new(stoch[(o, i)], 0.0);
            }
        }
        Self::from_transfer(t, in_dims, out_dims).expect("dephased shapes agree")
    }

    pub fn choi(&self) -> &DMatrix<Complex64> {
        &self.choi
    }

    pub fn transfer(&self) -> &DMatrix<Complex64> {
        &self.transfer
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let c = Complex64::new(factor, 0.0);
        QuantumChannel {
            choi: self.choi.map(|z| z * c),
            in_dims: self.in_dims.clone(),
            out_dims: self.out_dims.clone(),
            transfer: self.transfer.map(|z| z * c),
        }
    }

    /// `Tr_out J`, a `D x D` matrix.
    pub fn partial_trace_output(&self) -> DMatrix<Complex64> {
        partial_trace_output(&self.choi, product(&self.in_dims), product(&self.out_dims))
    }

    pub fn validate(&self, class: MapClass) -> Vec<MapViolation> {
        validate_choi(&self.choi, product(&self.in_dims), product(&self.out_dims), class)
    }
}

pub(crate) fn partial_trace_output(
    choi: &DMatrix<Complex64>,
    din: usize,
    dout: usize,
) -> DMatrix<Complex64> {
    DMatrix::from_fn(din, din, |i, i2| {
        (0..dout).map(|o| choi[(o * din + i, o * din + i2)]).sum()
    })
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

pub(crate) fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn validate_choi(
    choi: &DMatrix<Complex64>,
    din: usize,
    dout: usize,
    class: MapClass,
) -> Vec<MapViolation> {
    let mut out = Vec::new();
    let herm = crate::semantics::linalg::max_abs_diff(choi, &choi.adjoint());
    if herm > TOL_EQ {
        out.push(MapViolation::NotHermitian { deviation: herm });
    }
    let min = min_eigenvalue(choi);
    if min < -TOL_PSD {
        out.push(MapViolation::NotPositive { min_eigenvalue: min });
    }
    let pt = partial_trace_output(choi, din, dout);
    let id = DMatrix::<Complex64>::identity(din, din);
    match class {
        MapClass::Stochastic | MapClass::Cptp => {
            let dev = crate::semantics::linalg::max_abs_diff(&pt, &id);
            if dev > TOL_EQ {
                out.push(MapViolation::NotTracePreserving { deviation: dev });
            }
        }
        MapClass::Substochastic => {
            let gap = min_eigenvalue(&(id - pt));
            if gap < -TOL_PSD {
                out.push(MapViolation::TraceIncreasing { excess: -gap });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_channel_choi_is_the_unnormalised_bell_projector() {
        let ch = QuantumChannel::identity(2);
        let mut want = DMatrix::zeros(4, 4);
        for &(r, s) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            want[(r, s)] = c(1.0);
        }
        assert_eq!(ch.choi(), &want);
        assert!(ch.validate(MapClass::Cptp).is_empty());
        assert_eq!(ch.transfer(), &DMatrix::identity(4, 4));
    }

    #[test]
    fn completely_dephasing_choi_is_valid() {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]));
        let ch = QuantumChannel::from_choi(diag, vec![2], vec![2]).unwrap();
        assert!(ch.validate(MapClass::Cptp).is_empty());
        assert_eq!(ch, QuantumChannel::dephased(&DMatrix::identity(2, 2), vec![2], vec![2]));
    }

    #[test]
    fn choi_transfer_round_trip_multi_system() {
        let j = DMatrix::from_fn(12, 12, |r, s| Complex64::new((r * 12 + s) as f64, r as f64 - s as f64));
        let t = choi_to_transfer(&j, &[2, 3], &[2]);
        assert_eq!(t.shape(), (4, 36));
        assert_eq!(transfer_to_choi(&t, &[2, 3], &[2]), j);
    }

    #[test]
    fn blocked_index_orders_wire_by_wire() {
        // ρ on 2⊗2: entry ((a,b),(a',b')) sits at (a·2+a')·4 + (b·2+b')
        assert_eq!(blocked_index(&[2, 2], 0b10, 0b01), 2 * 4 + 1);
        assert_eq!(blocked_index(&[3], 2, 1), 7);
    }

    #[test]
    fn scaled_channel_is_trace_decreasing() {
        let ch = QuantumChannel::identity(2).scaled(0.5);
        assert!(ch.validate(MapClass::Substochastic).is_empty());
        assert!(matches!(
            ch.validate(MapClass::Cptp)[..],
            [MapViolation::NotTracePreserving { .. }]
        ));
        let big = QuantumChannel::identity(2).scaled(1.5);
        assert!(matches!(
            big.validate(MapClass::Substochastic)[..],
            [MapViolation::TraceIncreasing { .. }]
        ));
    }
}
