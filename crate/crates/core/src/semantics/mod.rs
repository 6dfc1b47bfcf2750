//! Concrete interpretations of diagrams.
//!
//! Matrix convention: columns are indexed by the composite input basis, rows
//! by the composite output basis, and the leftmost boundary port is the most
//! significant factor. Sequential composition is left multiplication by the
//! later map; parallel composition is the Kronecker product.
//!
//! Two backends are provided. `FinStoch` evaluates to real stochastic
//! matrices. `Quantum` evaluates to transfer matrices (see [`channel`]); a
//! system of dimension `d` then carries a `d²`-dimensional wire.

pub mod channel;
mod eval;
pub mod linalg;
mod random;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{BoxKind, BoxSignature, SystemLabel};
pub use channel::QuantumChannel;
pub use eval::{evaluate, evaluate_with, EvalOrder};
use linalg::{product, Scalar};
pub use random::random_generator;

/// Elementwise equality tolerance (max-norm).
pub const TOL_EQ: f64 = 1e-9;
/// Tolerance on the minimum eigenvalue of a Choi matrix.
pub const TOL_PSD: f64 = 1e-9;
/// Largest supported dimension of a single system.
pub const MAX_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    FinStoch,
    Quantum,
}

impl Backend {
    /// Dimension of the wire carrying a system of dimension `d`.
    pub fn wire_dim(self, d: usize) -> usize {
        match self {
            Backend::FinStoch => d,
            Backend::Quantum => d * d,
        }
    }

    /// Default numerical tolerance for checks in this backend.
    pub fn default_tol(self) -> f64 {
        match self {
            Backend::FinStoch => 1e-9,
            Backend::Quantum => 1e-7,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::FinStoch => f.write_str("finstoch"),
            Backend::Quantum => f.write_str("quantum"),
        }
    }
}

/// Class a concrete map is expected to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapClass {
    Stochastic,
    Substochastic,
    Cptp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapViolation {
    NegativeEntry { row: usize, col: usize, value: f64 },
    ColumnSum { column: usize, sum: f64 },
    NotHermitian { deviation: f64 },
    NotPositive { min_eigenvalue: f64 },
    NotTracePreserving { deviation: f64 },
    TraceIncreasing { excess: f64 },
}

impl fmt::Display for MapViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapViolation::NegativeEntry { row, col, value } => {
                write!(f, "entry ({row},{col}) is negative: {value}")
            }
            MapViolation::ColumnSum { column, sum } => {
                write!(f, "column {column} sums to {}", round_display(*sum))
            }
            MapViolation::NotHermitian { deviation } => {
                write!(f, "Choi matrix is not Hermitian (deviation {deviation:.3e})")
            }
            MapViolation::NotPositive { min_eigenvalue } => {
                write!(f, "Choi matrix is not positive (min eigenvalue {min_eigenvalue:.3e})")
            }
            MapViolation::NotTracePreserving { deviation } => {
                write!(f, "not trace preserving (deviation {deviation:.3e})")
            }
            MapViolation::TraceIncreasing { excess } => {
                write!(f, "trace increasing (excess {excess:.3e})")
            }
        }
    }
}

fn round_display(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("box `{0}` is not bound")]
    UnboundBox(String),
    #[error("system `{0}` has no dimension")]
    UnboundSystem(String),
    #[error("invalid dimension {dim} for system `{system}` (must be 1..={MAX_DIM})")]
    InvalidDimension { system: String, dim: usize },
    #[error("dimension mismatch at {location}: {detail}")]
    DimensionMismatch { location: String, detail: String },
    #[error("{0}")]
    Shape(String),
    #[error("stochastic map has negative entry {value} at ({row},{col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("box `{0}` is bound to a quantum channel but the backend is finstoch")]
    BackendMismatch(String),
    #[error("diagram is not well formed: {0}")]
    Malformed(String),
}

/// A nonnegative real matrix, columns indexed by inputs. Entries within
/// `TOL_EQ` below zero are clamped to zero on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMap {
    matrix: DMatrix<f64>,
}

impl StochasticMap {
    pub fn new(mut matrix: DMatrix<f64>) -> Result<Self, SemanticsError> {
        for col in 0..matrix.ncols() {
            for row in 0..matrix.nrows() {
                let value = matrix[(row, col)];
                if !value.is_finite() || value < -TOL_EQ {
                    return Err(SemanticsError::NegativeEntry { row, col, value });
                }
                if value < 0.0 {
                    matrix[(row, col)] = 0.0;
                }
            }
        }
        Ok(StochasticMap { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SemanticsError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(SemanticsError::Shape("ragged matrix rows".into()));
        }
        Self::new(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.sum()).collect()
    }

    pub fn validate(&self, class: MapClass) -> Vec<MapViolation> {
        let mut out = Vec::new();
        for (j, sum) in self.column_sums().into_iter().enumerate() {
            let bad = match class {
                MapClass::Stochastic | MapClass::Cptp => (sum - 1.0).abs() > TOL_EQ,
                MapClass::Substochastic => sum > 1.0 + TOL_EQ,
            };
            if bad {
                out.push(MapViolation::ColumnSum { column: j, sum });
            }
        }
        out
    }
}

/// A concrete map bound to a generator box.
#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Stochastic(StochasticMap),
    Channel(QuantumChannel),
}

impl Binding {
    pub fn validate(&self, class: MapClass) -> Vec<MapViolation> {
        match self {
            Binding::Stochastic(s) => s.validate(match class {
                MapClass::Cptp => MapClass::Stochastic,
                c => c,
            }),
            Binding::Channel(c) => c.validate(match class {
                MapClass::Stochastic => MapClass::Cptp,
                c => c,
            }),
        }
    }
}

/// Validate a bound map against a class; empty iff valid.
pub fn validate(map: &Binding, class: MapClass) -> Vec<MapViolation> {
    map.validate(class)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Result of evaluating a diagram: a matrix together with the system
/// dimensions of its boundary. Quantum maps are in transfer form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcreteMap {
    backend: Backend,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
    matrix: MapMatrix,
}

impl ConcreteMap {
    pub fn real(in_dims: Vec<usize>, out_dims: Vec<usize>, m: DMatrix<f64>) -> Self {
        assert_eq!(m.shape(), (product(&out_dims), product(&in_dims)), "finstoch map shape");
        ConcreteMap {
            backend: Backend::FinStoch,
            in_dims,
            out_dims,
            matrix: MapMatrix::Real(m),
        }
    }

    /// A quantum map given by its transfer matrix.
    pub fn transfer(in_dims: Vec<usize>, out_dims: Vec<usize>, m: DMatrix<Complex64>) -> Self {
        let (din, dout) = (product(&in_dims), product(&out_dims));
        assert_eq!(m.shape(), (dout * dout, din * din), "transfer matrix shape");
        ConcreteMap {
            backend: Backend::Quantum,
            in_dims,
            out_dims,
            matrix: MapMatrix::Complex(m),
        }
    }

    pub fn from_binding(b: &Binding, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Self {
        match b {
            Binding::Stochastic(s) => Self::real(in_dims, out_dims, s.matrix().clone()),
            Binding::Channel(c) => Self::transfer(in_dims, out_dims, c.transfer().clone()),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn wire_in_dims(&self) -> Vec<usize> {
        self.in_dims.iter().map(|&d| self.backend.wire_dim(d)).collect()
    }

    pub fn wire_out_dims(&self) -> Vec<usize> {
        self.out_dims.iter().map(|&d| self.backend.wire_dim(d)).collect()
    }

    pub fn matrix(&self) -> &MapMatrix {
        &self.matrix
    }

    pub fn as_real(&self) -> Option<&DMatrix<f64>> {
        match &self.matrix {
            MapMatrix::Real(m) => Some(m),
            MapMatrix::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&DMatrix<Complex64>> {
        match &self.matrix {
            MapMatrix::Complex(m) => Some(m),
            MapMatrix::Real(_) => None,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match &self.matrix {
            MapMatrix::Real(m) => m.shape(),
            MapMatrix::Complex(m) => m.shape(),
        }
    }

    /// Value of a map with no inputs and no outputs.
    pub fn scalar(&self) -> Option<Complex64> {
        if !self.in_dims.is_empty() || !self.out_dims.is_empty() {
            return None;
        }
        Some(match &self.matrix {
            MapMatrix::Real(m) => Complex64::new(m[(0, 0)], 0.0),
            MapMatrix::Complex(m) => m[(0, 0)],
        })
    }

    /// Max-norm distance; infinite when shapes or backends differ.
    pub fn max_abs_diff(&self, other: &ConcreteMap) -> f64 {
        match (&self.matrix, &other.matrix) {
            (MapMatrix::Real(a), MapMatrix::Real(b)) => linalg::max_abs_diff(a, b),
            (MapMatrix::Complex(a), MapMatrix::Complex(b)) => linalg::max_abs_diff(a, b),
            _ => f64::INFINITY,
        }
    }

    /// Reorder boundary ports: new input `i` is old input `in_perm[i]`, new
    /// output `j` is old output `out_perm[j]`.
    pub fn permute_ports(&self, in_perm: &[usize], out_perm: &[usize]) -> ConcreteMap {
        let (wi, wo) = (self.wire_in_dims(), self.wire_out_dims());
        fn go<T: Scalar>(m: &DMatrix<T>, wi: &[usize], wo: &[usize], ip: &[usize], op: &[usize]) -> DMatrix<T> {
            linalg::permute_cols(&linalg::permute_rows(m, wo, op), wi, ip)
        }
        ConcreteMap {
            backend: self.backend,
            in_dims: in_perm.iter().map(|&i| self.in_dims[i]).collect(),
            out_dims: out_perm.iter().map(|&j| self.out_dims[j]).collect(),
            matrix: match &self.matrix {
                MapMatrix::Real(m) => MapMatrix::Real(go(m, &wi, &wo, in_perm, out_perm)),
                MapMatrix::Complex(m) => MapMatrix::Complex(go(m, &wi, &wo, in_perm, out_perm)),
            },
        }
    }

    /// Choi matrix of a quantum map; `None` for finstoch maps.
    pub fn to_choi(&self) -> Option<DMatrix<Complex64>> {
        self.as_complex()
            .map(|t| channel::transfer_to_choi(t, &self.in_dims, &self.out_dims))
    }

    /// Sequential composition `later ∘ self`.
    pub fn then(&self, later: &ConcreteMap) -> Option<ConcreteMap> {
        if self.out_dims != later.in_dims || self.backend != later.backend {
            return None;
        }
        let matrix = match (&self.matrix, &later.matrix) {
            (MapMatrix::Real(a), MapMatrix::Real(b)) => MapMatrix::Real(b * a),
            (MapMatrix::Complex(a), MapMatrix::Complex(b)) => MapMatrix::Complex(b * a),
            _ => return None,
        };
        Some(ConcreteMap {
            backend: self.backend,
            in_dims: self.in_dims.clone(),
            out_dims: later.out_dims.clone(),
            matrix,
        })
    }

    /// Parallel composition, `self` as the most significant factor.
    pub fn tensor(&self, right: &ConcreteMap) -> Option<ConcreteMap> {
        let matrix = match (&self.matrix, &right.matrix) {
            (MapMatrix::Real(a), MapMatrix::Real(b)) => MapMatrix::Real(a.kronecker(b)),
            (MapMatrix::Complex(a), MapMatrix::Complex(b)) => MapMatrix::Complex(a.kronecker(b)),
            _ => return None,
        };
        Some(ConcreteMap {
            backend: self.backend,
            in_dims: self.in_dims.iter().chain(&right.in_dims).cloned().collect(),
            out_dims: self.out_dims.iter().chain(&right.out_dims).cloned().collect(),
            matrix,
        })
    }
}

/// Discarding effect on a system of dimension `d`, as a `1 x wire_dim` row:
/// all ones (marginalisation) or the vectorised identity (trace).
pub fn discard_row<T: Scalar>(backend: Backend, d: usize) -> DMatrix<T> {
    match backend {
        Backend::FinStoch => DMatrix::from_element(1, d, T::one()),
        Backend::Quantum => DMatrix::from_fn(1, d * d, |_, k| {
            if k / d == k % d {
                T::one()
            } else {
                T::zero()
            }
        }),
    }
}

/// Discard of a list of systems, Kronecker-ordered.
pub fn discard_rows<T: Scalar>(backend: Backend, dims: &[usize]) -> DMatrix<T> {
    dims.iter()
        .fold(DMatrix::from_element(1, 1, T::one()), |acc, &d| {
            acc.kronecker(&discard_row::<T>(backend, d))
        })
}

/// Normalised uniform state (maximally mixed in the quantum backend).
pub fn uniform_column<T: Scalar>(backend: Backend, d: usize) -> DMatrix<T> {
    discard_row::<T>(backend, d).transpose() * T::from_real(1.0 / d as f64)
}

/// Binding of system dimensions and box semantics under one backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpretation {
    backend: Backend,
    dims: BTreeMap<String, usize>,
    bindings: BTreeMap<String, Binding>,
    /// Whether every generator is meant to be terminal (stochastic / CPTP).
    pub terminal_intended: bool,
}

impl Interpretation {
    pub fn new(backend: Backend) -> Self {
        Interpretation {
            backend,
            dims: BTreeMap::new(),
            bindings: BTreeMap::new(),
            terminal_intended: true,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn set_dim(&mut self, system: &str, dim: usize) -> Result<(), SemanticsError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(SemanticsError::InvalidDimension {
                system: system.to_string(),
                dim,
            });
        }
        self.dims.insert(system.to_string(), dim);
        Ok(())
    }

    pub fn dim(&self, label: &SystemLabel) -> Result<usize, SemanticsError> {
        self.dims
            .get(label.name())
            .copied()
            .ok_or_else(|| SemanticsError::UnboundSystem(label.name().to_string()))
    }

    pub fn dims_of(&self, labels: &[SystemLabel]) -> Result<Vec<usize>, SemanticsError> {
        labels.iter().map(|l| self.dim(l)).collect()
    }

    pub fn wire_dim(&self, label: &SystemLabel) -> Result<usize, SemanticsError> {
        Ok(self.backend.wire_dim(self.dim(label)?))
    }

    /// Bind a concrete map to a generator, checking its shape against the
    /// declared system dimensions.
    pub fn bind(&mut self, sig: &BoxSignature, binding: Binding) -> Result<(), SemanticsError> {
        let din = product(&self.dims_of(sig.inputs())?);
        let dout = product(&self.dims_of(sig.outputs())?);
        match &binding {
            Binding::Stochastic(s) => {
                if s.matrix().shape() != (dout, din) {
                    return Err(SemanticsError::DimensionMismatch {
                        location: format!("box `{}`", sig.name()),
                        detail: format!(
                            "matrix is {}x{}, signature needs {dout}x{din}",
                            s.matrix().nrows(),
                            s.matrix().ncols()
                        ),
                    });
                }
            }
            Binding::Channel(c) => {
                if self.backend == Backend::FinStoch {
                    return Err(SemanticsError::BackendMismatch(sig.name().to_string()));
                }
                let want_in = self.dims_of(sig.inputs())?;
                let want_out = self.dims_of(sig.outputs())?;
                if c.in_dims() != want_in.as_slice() || c.out_dims() != want_out.as_slice() {
                    return Err(SemanticsError::DimensionMismatch {
                        location: format!("box `{}`", sig.name()),
                        detail: format!(
                            "channel dims {:?} -> {:?}, signature needs {want_in:?} -> {want_out:?}",
                            c.in_dims(),
                            c.out_dims()
                        ),
                    });
                }
            }
        }
        self.bindings.insert(sig.name().to_string(), binding);
        Ok(())
    }

    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Binding)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Real matrix of a box (finstoch backend).
    pub(crate) fn real_matrix(&self, sig: &BoxSignature) -> Result<DMatrix<f64>, SemanticsError> {
        match sig.kind() {
            BoxKind::Generator => match self.binding(sig.name()) {
                Some(Binding::Stochastic(s)) => Ok(s.matrix().clone()),
                Some(Binding::Channel(_)) => Err(SemanticsError::BackendMismatch(sig.name().into())),
                None => Err(SemanticsError::UnboundBox(sig.name().into())),
            },
            _ => self.structural_matrix(sig),
        }
    }

    /// Transfer matrix of a box (quantum backend); stochastic bindings are
    /// embedded by dephasing.
    pub(crate) fn transfer_matrix(&self, sig: &BoxSignature) -> Result<DMatrix<Complex64>, SemanticsError> {
        match sig.kind() {
            BoxKind::Generator => match self.binding(sig.name()) {
                Some(Binding::Channel(c)) => Ok(c.transfer().clone()),
                Some(Binding::Stochastic(s)) => Ok(QuantumChannel::dephased(
                    s.matrix(),
                    self.dims_of(sig.inputs())?,
                    self.dims_of(sig.outputs())?,
                )
                .transfer()
                .clone()),
                None => Err(SemanticsError::UnboundBox(sig.name().into())),
            },
            _ => self.structural_matrix(sig),
        }
    }

    fn structural_matrix<T: Scalar>(&self, sig: &BoxSignature) -> Result<DMatrix<T>, SemanticsError> {
        Ok(match sig.kind() {
            BoxKind::Identity => linalg::identity(self.wire_dim(&sig.inputs()[0])?),
            BoxKind::Swap => {
                linalg::swap_matrix(self.wire_dim(&sig.inputs()[0])?, self.wire_dim(&sig.inputs()[1])?)
            }
            BoxKind::Discard => discard_row(self.backend, self.dim(&sig.inputs()[0])?),
            BoxKind::Uniform => uniform_column(self.backend, self.dim(&sig.outputs()[0])?),
            BoxKind::Generator => unreachable!("generators carry bindings"),
        })
    }
}
