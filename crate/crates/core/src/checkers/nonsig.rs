use nalgebra::DMatrix;

use super::CheckError;
use crate::semantics::linalg::{self, product, Scalar};
use crate::semantics::{discard_rows, Backend, ConcreteMap, MapMatrix};

/// Bipartition of a map's ports: the listed inputs and outputs belong to
/// party A, all others to party B. Both keep their relative order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub a_inputs: Vec<usize>,
    pub a_outputs: Vec<usize>,
}

impl Split {
    pub fn new(a_inputs: Vec<usize>, a_outputs: Vec<usize>) -> Self {
        Split { a_inputs, a_outputs }
    }

    /// The first `x_a` inputs and first `y_a` outputs go to party A.
    pub fn leading(x_a: usize, y_a: usize) -> Self {
        Split::new((0..x_a).collect(), (0..y_a).collect())
    }

    fn perms(&self, n_in: usize, n_out: usize) -> Result<(Vec<usize>, Vec<usize>), CheckError> {
        Ok((complete(&self.a_inputs, n_in, "input")?, complete(&self.a_outputs, n_out, "output")?))
    }
}

fn complete(a: &[usize], n: usize, what: &str) -> Result<Vec<usize>, CheckError> {
    let mut seen = vec![false; n];
    for &i in a {
        if i >= n {
            return Err(CheckError::Split(format!("{what} {i} out of range (map has {n})")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(CheckError::Split(format!("{what} {i} listed twice")));
        }
    }
    Ok(a.iter().copied().chain((0..n).filter(|&i| !seen[i])).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonSigReport {
    pub a_to_b_blocked: bool,
    pub b_to_a_blocked: bool,
    pub residual_ab: f64,
    pub residual_ba: f64,
    /// `h : X_b -> Y_b`, present when A cannot signal to B.
    pub witness_h: Option<ConcreteMap>,
    /// `h' : X_a -> Y_a`, present when B cannot signal to A.
    pub witness_h_prime: Option<ConcreteMap>,
    /// Pool indices of the effects used, for the weak variant.
    pub effect_a: Option<usize>,
    pub effect_b: Option<usize>,
    pub tol: f64,
}

impl NonSigReport {
    pub fn non_signalling(&self) -> bool {
        self.a_to_b_blocked && self.b_to_a_blocked
    }

    pub fn residual(&self) -> f64 {
        self.residual_ab.max(self.residual_ba)
    }
}

/// Candidate effects replacing discarding on `Y_a` (pool `a`) and on `Y_b`
/// (pool `b`). Each effect is a map with no outputs on the whole party
/// output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EffectPool {
    pub a: Vec<ConcreteMap>,
    pub b: Vec<ConcreteMap>,
}

struct Parts {
    backend: Backend,
    xa: Vec<usize>,
    xb: Vec<usize>,
    ya: Vec<usize>,
    yb: Vec<usize>,
    f: MapMatrix,
}

fn parts(f: &ConcreteMap, split: &Split) -> Result<Parts, CheckError> {
    let (ip, op) = split.perms(f.in_dims().len(), f.out_dims().len())?;
    let g = f.permute_ports(&ip, &op);
    let (na, ma) = (split.a_inputs.len(), split.a_outputs.len());
    Ok(Parts {
        backend: f.backend(),
        xa: g.in_dims()[..na].to_vec(),
        xb: g.in_dims()[na..].to_vec(),
        ya: g.out_dims()[..ma].to_vec(),
        yb: g.out_dims()[ma..].to_vec(),
        f: g.matrix().clone(),
    })
}

fn wire(backend: Backend, dims: &[usize]) -> usize {
    product(&dims.iter().map(|&d| backend.wire_dim(d)).collect::<Vec<_>>())
}

/// Least-squares `h` with `h · r ≈ l`, given `r · r† = c · I`; returns `h`
/// and the max-norm residual of `h · r - l`.
fn factor<T: Scalar>(l: &DMatrix<T>, r: &DMatrix<T>) -> (DMatrix<T>, f64) {
    let c = (r * r.adjoint())[(0, 0)].real();
    let h = l * r.adjoint() * T::from_real(1.0 / c);
    let residual = linalg::max_abs_diff(&(&h * r), l);
    (h, residual)
}

/// Both directions against given effects on `Y_a` and `Y_b`.
fn directions<T: Scalar>(
    p: &Parts,
    f: &DMatrix<T>,
    e_a: &DMatrix<T>,
    e_b: &DMatrix<T>,
) -> ((DMatrix<T>, f64), (DMatrix<T>, f64)) {
    let w = |dims: &[usize]| wire(p.backend, dims);
    let id = |n: usize| DMatrix::<T>::identity(n, n);
    let l = e_a.kronecker(&id(w(&p.yb))) * f;
    let r = discard_rows::<T>(p.backend, &p.xa).kronecker(&id(w(&p.xb)));
    let l2 = id(w(&p.ya)).kronecker(e_b) * f;
    let r2 = id(w(&p.xa)).kronecker(&discard_rows::<T>(p.backend, &p.xb));
    (factor(&l, &r), factor(&l2, &r2))
}

fn wrap(backend: Backend, inp: &[usize], out: &[usize], m: MapMatrix) -> ConcreteMap {
    match (backend, m) {
        (Backend::FinStoch, MapMatrix::Real(m)) => ConcreteMap::real(inp.to_vec(), out.to_vec(), m),
        (_, MapMatrix::Complex(m)) => ConcreteMap::transfer(inp.to_vec(), out.to_vec(), m),
        (Backend::Quantum, MapMatrix::Real(m)) => {
            ConcreteMap::transfer(inp.to_vec(), out.to_vec(), m.map(|x| x.into()))
        }
    }
}

fn report(p: &Parts, ab: (MapMatrix, f64), ba: (MapMatrix, f64), tol: f64) -> NonSigReport {
    let a_to_b_blocked = ab.1 <= tol;
    let b_to_a_blocked = ba.1 <= tol;
    NonSigReport {
        a_to_b_blocked,
        b_to_a_blocked,
        residual_ab: ab.1,
        residual_ba: ba.1,
        witness_h: a_to_b_blocked.then(|| wrap(p.backend, &p.xb, &p.yb, ab.0)),
        witness_h_prime: b_to_a_blocked.then(|| wrap(p.backend, &p.xa, &p.ya, ba.0)),
        effect_a: None,
        effect_b: None,
        tol,
    }
}

/// Non-signalling in both directions, deciding `∃h` and `∃h'` by
/// least-squares factorisation against `discard ⊗ id`.
pub fn check_nonsignalling(f: &ConcreteMap, split: &Split, tol: f64) -> Result<NonSigReport, CheckError> {
    let p = parts(f, split)?;
    let (ab, ba) = match &p.f {
        MapMatrix::Real(m) => {
            let ((h, r), (h2, r2)) = directions(&p, m, &discard_rows(p.backend, &p.ya), &discard_rows(p.backend, &p.yb));
            ((MapMatrix::Real(h), r), (MapMatrix::Real(h2), r2))
        }
        MapMatrix::Complex(m) => {
            let ((h, r), (h2, r2)) = directions(&p, m, &discard_rows(p.backend, &p.ya), &discard_rows(p.backend, &p.yb));
            ((MapMatrix::Complex(h), r), (MapMatrix::Complex(h2), r2))
        }
    };
    Ok(report(&p, ab, ba, tol))
}

/// The weakened variant: discarding on the other party's output is replaced
/// by any effect of the pool. Each direction takes the pool entry with the
/// smallest residual, ties going to the earliest.
pub fn check_weak_nonsignalling(
    f: &ConcreteMap,
    split: &Split,
    pool: &EffectPool,
    tol: f64,
) -> Result<NonSigReport, CheckError> {
    let p = parts(f, split)?;
    if pool.a.is_empty() {
        return Err(CheckError::EmptyPool('A'));
    }
    if pool.b.is_empty() {
        return Err(CheckError::EmptyPool('B'));
    }
    let check = |party: char, index: usize, e: &ConcreteMap, dims: &[usize]| {
        if e.in_dims() != dims || !e.out_dims().is_empty() || e.backend() != p.backend {
            Err(CheckError::EffectShape { party, index })
        } else {
            Ok(())
        }
    };
    let mut best_ab: Option<(usize, (MapMatrix, f64))> = None;
    let mut best_ba: Option<(usize, (MapMatrix, f64))> = None;
    let disc = |dims: &[usize]| wrap(p.backend, dims, &[], MapMatrix::Real(discard_rows(p.backend, dims)));
    let (disc_a, disc_b) = (disc(&p.ya), disc(&p.yb));
    for (i, e) in pool.a.iter().enumerate() {
        check('A', i, e, &p.ya)?;
        let (ab, _) = run(&p, e, &disc_b);
        if best_ab.as_ref().is_none_or(|b| ab.1 < b.1 .1) {
            best_ab = Some((i, ab));
        }
    }
    for (j, e) in pool.b.iter().enumerate() {
        check('B', j, e, &p.yb)?;
        let (_, ba) = run(&p, &disc_a, e);
        if best_ba.as_ref().is_none_or(|b| ba.1 < b.1 .1) {
            best_ba = Some((j, ba));
        }
    }
    let (i, ab) = best_ab.expect("pool a is nonempty");
    let (j, ba) = best_ba.expect("pool b is nonempty");
    let mut rep = report(&p, ab, ba, tol);
    rep.effect_a = Some(i);
    rep.effect_b = Some(j);
    Ok(rep)
}

fn run(p: &Parts, e_a: &ConcreteMap, e_b: &ConcreteMap) -> ((MapMatrix, f64), (MapMatrix, f64)) {
    match &p.f {
        MapMatrix::Real(m) => {
            let ((h, r), (h2, r2)) = directions(p, m, e_a.as_real().unwrap(), e_b.as_real().unwrap());
            ((MapMatrix::Real(h), r), (MapMatrix::Real(h2), r2))
        }
        MapMatrix::Complex(m) => {
            let ((h, r), (h2, r2)) = directions(p, m, e_a.as_complex().unwrap(), e_b.as_complex().unwrap());
            ((MapMatrix::Complex(h), r), (MapMatrix::Complex(h2), r2))
        }
    }
}
