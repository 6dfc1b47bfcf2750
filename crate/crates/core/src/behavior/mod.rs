//! Bipartite behaviours `p(a,b|x,y)`: marginal non-signalling, local hidden
//! variable models as mixtures of deterministic strategies, and the bridge
//! from finstoch maps.

mod io;
pub mod lp;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::semantics::{Backend, ConcreteMap};
pub use io::{parse_behavior, write_behavior};

/// Largest alphabet accepted on either side.
pub const MAX_ALPHABET: usize = 8;

/// Default bound on the number of deterministic strategy pairs.
pub const DEFAULT_VERTEX_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("alphabet sizes must be in 1..={MAX_ALPHABET}, got {0:?}")]
    Alphabet([usize; 4]),
    #[error("table has {got} cells, expected {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("p({a},{b}|{x},{y}) = {value} is outside [0, 1]")]
    OutOfRange { a: usize, b: usize, x: usize, y: usize, value: f64 },
    #[error("p(.,.|{x},{y}) sums to {sum}")]
    Normalization { x: usize, y: usize, sum: f64 },
    #[error("{0} is not stochastic")]
    NotStochastic(&'static str),
    #[error("{0}")]
    Shape(String),
    #[error("isotropic weight {0} is outside [0, 1]")]
    Weight(f64),
    #[error("{vertices} deterministic strategies exceed the cap of {cap}")]
    VertexCap { vertices: u128, cap: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A table `p(a,b|x,y)` with alphabet sizes `|A|, |B|, |X|, |Y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    sizes: [usize; 4],
    table: Vec<f64>,
}

impl Behavior {
    /// Validate and wrap a table laid out as `[x][y][a][b]`.
    pub fn new(sizes: [usize; 4], table: Vec<f64>, tol: f64) -> Result<Self, BehaviorError> {
        if sizes.iter().any(|&s| s == 0 || s > MAX_ALPHABET) {
            return Err(BehaviorError::Alphabet(sizes));
        }
        let expected = sizes.iter().product();
        if table.len() != expected {
            return Err(BehaviorError::TableSize {
                expected,
                got: table.len(),
            });
        }
        let beh = Behavior { sizes, table };
        let [na, nb, nx, ny] = sizes;
        for x in 0..nx {
            for y in 0..ny {
                let mut sum = 0.0;
                for a in 0..na {
                    for b in 0..nb {
                        let value = beh.p(a, b, x, y);
                        if !(-tol..=1.0 + tol).contains(&value) {
                            return Err(BehaviorError::OutOfRange { a, b, x, y, value });
                        }
                        sum += value;
                    }
                }
                if (sum - 1.0).abs() > tol {
                    return Err(BehaviorError::Normalization { x, y, sum });
                }
            }
        }
        Ok(beh)
    }

    pub fn from_fn(
        sizes: [usize; 4],
        tol: f64,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self, BehaviorError> {
        let [na, nb, nx, ny] = sizes;
        let mut table = Vec::with_capacity(sizes.iter().product());
        for x in 0..nx {
            for y in 0..ny {
                for a in 0..na {
                    for b in 0..nb {
                        table.push(f(a, b, x, y));
                    }
                }
            }
        }
        Behavior::new(sizes, table, tol)
    }

    /// `[|A|, |B|, |X|, |Y|]`.
    pub fn sizes(&self) -> [usize; 4] {
        self.sizes
    }

    fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        let [na, nb, _, ny] = self.sizes;
        ((x * ny + y) * na + a) * nb + b
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[self.index(a, b, x, y)]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Convex combination `v · self + (1 − v) · other`.
    pub fn mix(&self, v: f64, other: &Behavior) -> Result<Behavior, BehaviorError> {
        if self.sizes != other.sizes {
            return Err(BehaviorError::Shape("alphabet sizes differ".into()));
        }
        let table = self.table.iter().zip(&other.table).map(|(p, q)| v * p + (1.0 - v) * q).collect();
        Behavior::new(self.sizes, table, 1e-9)
    }

    /// The behaviour as a finstoch map `X ⊗ Y -> A ⊗ B`.
    pub fn to_map(&self) -> ConcreteMap {
        let [na, nb, nx, ny] = self.sizes;
        let m = DMatrix::from_fn(na * nb, nx * ny, |r, c| self.p(r / nb, r % nb, c / ny, c % ny));
        ConcreteMap::real(vec![nx, ny], vec![na, nb], m)
    }

    /// Read a finstoch map `X ⊗ Y -> A ⊗ B` as a behaviour.
    pub fn from_map(map: &ConcreteMap, tol: f64) -> Result<Behavior, BehaviorError> {
        let (Some(m), [nx, ny], [na, nb]) = (map.as_real(), map.in_dims(), map.out_dims()) else {
            return Err(BehaviorError::Shape(
                "expected a finstoch map with two inputs and two outputs".into(),
            ));
        };
        Behavior::from_fn([*na, *nb, *nx, *ny], tol, |a, b, x, y| m[(a * nb + b, x * ny + y)])
    }

    /// Behaviour of the deterministic strategy pair `a = λ(x)`, `b = μ(y)`.
    pub fn deterministic(sizes: [usize; 4], lambda: &[usize], mu: &[usize]) -> Result<Behavior, BehaviorError> {
        Behavior::from_fn(sizes, 0.0, |a, b, x, y| f64::from(u8::from(lambda[x] == a && mu[y] == b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedBehavior {
    PrBox,
    Uniform,
    /// `v · PR + (1 − v) · uniform`.
    Isotropic(f64),
}

/// Binary behaviours used as reference points.
pub fn named_behavior(name: NamedBehavior) -> Result<Behavior, BehaviorError> {
    let pr = || Behavior::from_fn([2; 4], 0.0, |a, b, x, y| if (a ^ b) == (x & y) { 0.5 } else { 0.0 });
    match name {
        NamedBehavior::PrBox => pr(),
        NamedBehavior::Uniform => Behavior::from_fn([2; 4], 0.0, |_, _, _, _| 0.25),
        NamedBehavior::Isotropic(v) => {
            if !(0.0..=1.0).contains(&v) {
                return Err(BehaviorError::Weight(v));
            }
            pr()?.mix(v, &named_behavior(NamedBehavior::Uniform)?)
        }
    }
}

/// Marginal non-signalling: `Σ_a p(a,b|x,y)` does not depend on `x` and
/// `Σ_b p(a,b|x,y)` does not depend on `y`. Returns the verdict and the
/// largest deviation.
pub fn behavior_nonsignalling(beh: &Behavior, tol: f64) -> (bool, f64) {
    let [na, nb, nx, ny] = beh.sizes;
    let mut residual: f64 = 0.0;
    for y in 0..ny {
        for b in 0..nb {
            let marg = |x| (0..na).map(|a| beh.p(a, b, x, y)).sum::<f64>();
            let m0 = marg(0);
            for x in 1..nx {
                residual = residual.max((marg(x) - m0).abs());
            }
        }
    }
    for x in 0..nx {
        for a in 0..na {
            let marg = |y| (0..nb).map(|b| beh.p(a, b, x, y)).sum::<f64>();
            let m0 = marg(0);
            for y in 1..ny {
                residual = residual.max((marg(y) - m0).abs());
            }
        }
    }
    (residual <= tol, residual)
}

fn is_stochastic(m: &DMatrix<f64>, tol: f64) -> bool {
    m.iter().all(|&v| v >= -tol) && m.column_iter().all(|c| (c.sum() - 1.0).abs() <= tol)
}

/// `p(a,b|x,y) = Σ_λ h_bot(λ) h_a(a|x,λ) h_b(b|y,λ)`.
///
/// `h_bot` is a column over `Λ`; `h_a` is `|A| x (|X|·|Λ|)` with column
/// `x·|Λ| + λ`, and `h_b` likewise.
pub fn behavior_from_v_shape(
    h_bot: &DVector<f64>,
    h_a: &DMatrix<f64>,
    h_b: &DMatrix<f64>,
    tol: f64,
) -> Result<Behavior, BehaviorError> {
    let nl = h_bot.len();
    if nl == 0 || h_a.ncols() % nl != 0 || h_b.ncols() % nl != 0 {
        return Err(BehaviorError::Shape(format!(
            "local columns {} and {} are not multiples of |Λ| = {nl}",
            h_a.ncols(),
            h_b.ncols()
        )));
    }
    if h_bot.iter().any(|&v| v < -tol) || (h_bot.sum() - 1.0).abs() > tol {
        return Err(BehaviorError::NotStochastic("h_bot"));
    }
    if !is_stochastic(h_a, tol) {
        return Err(BehaviorError::NotStochastic("h_a"));
    }
    if !is_stochastic(h_b, tol) {
        return Err(BehaviorError::NotStochastic("h_b"));
    }
    let sizes = [h_a.nrows(), h_b.nrows(), h_a.ncols() / nl, h_b.ncols() / nl];
    Behavior::from_fn(sizes, tol.max(1e-12), |a, b, x, y| {
        (0..nl).map(|l| h_bot[l] * h_a[(a, x * nl + l)] * h_b[(b, y * nl + l)]).sum()
    })
}

/// A deterministic strategy pair: `a = lambda[x]`, `b = mu[y]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    pub lambda: Vec<usize>,
    pub mu: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhvCertificate {
    pub feasible: bool,
    /// Nonzero mixture weights when feasible.
    pub weights: Vec<(Strategy, f64)>,
    /// Max-norm distance between the table and the best mixture found.
    pub residual: f64,
    /// Separating functional over cells when infeasible: its value on every
    /// deterministic behaviour is at most 0 and on the table equals `margin`.
    /// Laid out like the table.
    pub farkas: Option<Vec<f64>>,
    pub margin: f64,
    pub vertices: usize,
}

fn digits(mut k: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for slot in d.iter_mut().rev() {
        *slot = k % base;
        k /= base;
    }
    d
}

/// Decide whether `beh` is a mixture of deterministic strategy pairs.
pub fn lhv_feasible(beh: &Behavior, tol: f64, vertex_cap: u64) -> Result<LhvCertificate, BehaviorError> {
    let [na, nb, nx, ny] = beh.sizes;
    let count_a = (na as u128).pow(nx as u32);
    let count_b = (nb as u128).pow(ny as u32);
    let vertices = count_a * count_b;
    if vertices > u128::from(vertex_cap) {
        return Err(BehaviorError::VertexCap { vertices, cap: vertex_cap });
    }
    let (count_a, count_b, n) = (count_a as usize, count_b as usize, vertices as usize);
    let cells = beh.table.len();
    let strategies: Vec<Strategy> = (0..n)
        .map(|v| Strategy {
            lambda: digits(v / count_b, na, nx),
            mu: digits(v % count_b, nb, ny),
        })
        .collect();
    debug_assert_eq!(strategies.len(), count_a * count_b);
    let mut a = DMatrix::<f64>::zeros(cells + 1, n);
    for (v, s) in strategies.iter().enumerate() {
        for x in 0..nx {
            for y in 0..ny {
                a[(beh.index(s.lambda[x], s.mu[y], x, y), v)] = 1.0;
            }
        }
        a[(cells, v)] = 1.0;
    }
    let b = DVector::from_iterator(cells + 1, beh.table.iter().copied().chain([1.0]));
    let sol = lp::phase_one(&a, &b);
    let residual = (&a.rows(0, cells) * &sol.w - b.rows(0, cells)).amax();
    let feasible = residual <= tol;
    let weights = if feasible {
        strategies
            .into_iter()
            .zip(sol.w.iter())
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, &w)| (s, w))
            .collect()
    } else {
        Vec::new()
    };
    let farkas = (!feasible).then(|| {
        // fold the normalisation multiplier into the cells: every (x, y)
        // block of a deterministic behaviour or of the table sums to 1
        let shift = sol.dual[cells] / (nx * ny) as f64;
        (0..cells).map(|i| sol.dual[i] + shift).collect::<Vec<f64>>()
    });
    let margin = match &farkas {
        Some(y) => y.iter().zip(&beh.table).map(|(y, p)| y * p).sum(),
        None => 0.0,
    };
    Ok(LhvCertificate {
        feasible,
        weights,
        residual,
        farkas,
        margin,
        vertices: n,
    })
}

/// Whether a map evaluated in the finstoch backend can be read as a
/// behaviour.
pub fn is_behavior_map(map: &ConcreteMap) -> bool {
    map.backend() == Backend::FinStoch && map.in_dims().len() == 2 && map.out_dims().len() == 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_tables() {
        let u = named_behavior(NamedBehavior::Uniform).unwrap();
        assert!(u.table().iter().all(|&p| p == 0.25));
        let pr = named_behavior(NamedBehavior::PrBox).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let want = if (a ^ b) == (x & y) { 0.5 } else { 0.0 };
                        assert_eq!(pr.p(a, b, x, y), want);
                    }
                }
            }
        }
        assert!(matches!(
            named_behavior(NamedBehavior::Isotropic(1.5)),
            Err(BehaviorError::Weight(_))
        ));
    }

    #[test]
    fn pr_box_is_nonsignalling_but_not_local() {
        let pr = named_behavior(NamedBehavior::PrBox).unwrap();
        assert!(behavior_nonsignalling(&pr, 1e-12).0);
        let c = lhv_feasible(&pr, 1e-9, DEFAULT_VERTEX_CAP).unwrap();
        assert!(!c.feasible);
        assert_eq!(c.vertices, 16);
        let y = c.farkas.unwrap();
        for v in 0..16 {
            let s = Strategy {
                lambda: digits(v / 4, 2, 2),
                mu: digits(v % 4, 2, 2),
            };
            let d = Behavior::deterministic([2; 4], &s.lambda, &s.mu).unwrap();
            let val: f64 = y.iter().zip(d.table()).map(|(y, p)| y * p).sum();
            assert!(val <= 1e-9, "vertex {v}: {val}");
        }
        assert!(c.margin > 1e-9);
    }

    #[test]
    fn signalling_table_is_detected() {
        // b copies x
        let beh = Behavior::from_fn([2; 4], 0.0, |a, b, x, _| if a == 0 && b == x { 1.0 } else { 0.0 }).unwrap();
        let (ok, r) = behavior_nonsignalling(&beh, 1e-9);
        assert!(!ok);
        assert_eq!(r, 1.0);
    }

    #[test]
    fn uniform_and_vertices_are_local() {
        let u = named_behavior(NamedBehavior::Uniform).unwrap();
        let c = lhv_feasible(&u, 1e-9, DEFAULT_VERTEX_CAP).unwrap();
        assert!(c.feasible);
        let total: f64 = c.weights.iter().map(|w| w.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let d = Behavior::deterministic([2; 4], &[0, 1], &[0, 1]).unwrap();
        let c = lhv_feasible(&d, 1e-9, DEFAULT_VERTEX_CAP).unwrap();
        assert!(c.feasible);
        assert_eq!(c.weights.len(), 1);
        assert_eq!(c.weights[0].0, Strategy { lambda: vec![0, 1], mu: vec![0, 1] });
        assert!((c.weights[0].1 - 1.0).abs() < 1e-12);
    }

    /// Dependent rows leave many artificials basic at zero; pure Bland
    /// pivoting crawls here.
    #[test]
    fn degenerate_three_outcome_table_is_fast() {
        let beh = Behavior::from_fn([3; 4], 1e-9, |_, _, _, _| 1.0 / 9.0).unwrap();
        let start = std::time::Instant::now();
        let c = lhv_feasible(&beh, 1e-9, DEFAULT_VERTEX_CAP).unwrap();
        assert!(c.feasible);
        assert!(c.residual <= 1e-12);
        assert!(start.elapsed().as_secs() < 10, "{:?}", start.elapsed());
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let beh = Behavior::from_fn([8, 8, 8, 8], 1e-9, |_, _, _, _| 1.0 / 64.0).unwrap();
        assert!(matches!(
            lhv_feasible(&beh, 1e-9, DEFAULT_VERTEX_CAP),
            Err(BehaviorError::VertexCap { .. })
        ));
    }

    #[test]
    fn v_shape_with_trivial_lambda_is_a_product() {
        let h_bot = DVector::from_vec(vec![1.0]);
        let h_a = DMatrix::from_row_slice(2, 2, &[0.3, 0.9, 0.7, 0.1]);
        let h_b = DMatrix::from_row_slice(2, 2, &[0.6, 0.2, 0.4, 0.8]);
        let beh = behavior_from_v_shape(&h_bot, &h_a, &h_b, 1e-9).unwrap();
        for (a, b, x, y) in [(0, 0, 0, 0), (1, 0, 1, 1), (0, 1, 1, 0)] {
            assert!((beh.p(a, b, x, y) - h_a[(a, x)] * h_b[(b, y)]).abs() < 1e-15);
        }
        let bad = DMatrix::from_row_slice(2, 2, &[0.3, 0.9, 0.6, 0.1]);
        assert_eq!(
            behavior_from_v_shape(&h_bot, &bad, &h_b, 1e-9).unwrap_err(),
            BehaviorError::NotStochastic("h_a")
        );
    }

    #[test]
    fn map_round_trip() {
        let pr = named_behavior(NamedBehavior::PrBox).unwrap();
        assert_eq!(Behavior::from_map(&pr.to_map(), 1e-12).unwrap(), pr);
    }
}
