//! Seeded random diagrams over a small fixed signature.
#![allow(dead_code)]

use std::sync::Arc;

use causalkit::diagram::{par_all, seq, BoxSignature, Diagram, SystemLabel};
use causalkit::semantics::{random_generator, Backend, Interpretation, MapClass, MapMatrix, ConcreteMap};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SYSTEMS: [&str; 3] = ["A", "B", "C"];

pub fn lab(n: &str) -> SystemLabel {
    SystemLabel::normal(n)
}

/// Random dimensions for A, B, C; the quantum backend stays at 1..=2 to keep
/// transfer matrices small.
pub fn interpretation(backend: Backend, rng: &mut ChaCha8Rng) -> Interpretation {
    let mut interp = Interpretation::new(backend);
    let max = if backend == Backend::Quantum { 2 } else { 3 };
    for s in SYSTEMS {
        interp.set_dim(s, rng.random_range(1..=max)).unwrap();
    }
    interp
}

pub fn random_labels(rng: &mut ChaCha8Rng, max: usize) -> Vec<SystemLabel> {
    (0..rng.random_range(0..=max)).map(|_| lab(SYSTEMS[rng.random_range(0..3)])).collect()
}

/// Builds random diagrams, binding every fresh box in `interp`.
pub struct Gen<'a> {
    pub rng: ChaCha8Rng,
    pub interp: &'a mut Interpretation,
    pub class: MapClass,
    /// Outputs beyond this many are discarded after every layer.
    pub max_width: usize,
    fresh: usize,
}

impl<'a> Gen<'a> {
    pub fn new(seed: u64, interp: &'a mut Interpretation) -> Self {
        let class = match interp.backend() {
            Backend::FinStoch => MapClass::Stochastic,
            Backend::Quantum => MapClass::Cptp,
        };
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            interp,
            class,
            max_width: 3,
            fresh: 0,
        }
    }

    pub fn boxed(&mut self, ins: Vec<SystemLabel>, outs: Vec<SystemLabel>) -> Diagram {
        let sig = Arc::new(BoxSignature::generator(&format!("g{}", self.fresh), ins, outs));
        self.fresh += 1;
        let di = self.interp.dims_of(sig.inputs()).unwrap();
        let dout = self.interp.dims_of(sig.outputs()).unwrap();
        let seed = self.rng.random();
        let b = random_generator(self.interp.backend(), &di, &dout, self.class, seed);
        self.interp.bind(&sig, b).unwrap();
        Diagram::single(sig)
    }

    /// One layer acting on `inputs`: chunks of up to two wires each go
    /// through a fresh box, an identity, a swap, a discard, or pick up a
    /// fresh state beside them.
    pub fn layer(&mut self, inputs: &[SystemLabel]) -> Diagram {
        let mut pieces = Vec::new();
        let mut i = 0;
        while i < inputs.len() || (pieces.is_empty() && self.rng.random_bool(0.5)) {
            let take = self.rng.random_range(0..=2).min(inputs.len() - i);
            let chunk = &inputs[i..i + take];
            i += take;
            let piece = match (self.rng.random_range(0..5), chunk) {
                (0, [a, b]) => Diagram::swap(a, b),
                (1, chunk) => Diagram::identity_on(chunk),
                (2, [a]) => Diagram::discard(a),
                (3, chunk) => {
                    let outs = random_labels(&mut self.rng, 1);
                    par_all([&Diagram::identity_on(chunk), &self.boxed(vec![], outs)])
                }
                (_, chunk) => {
                    let outs = random_labels(&mut self.rng, 2);
                    self.boxed(chunk.to_vec(), outs)
                }
            };
            pieces.push(piece);
        }
        par_all(&pieces)
    }

    /// `depth` layers starting from `inputs`.
    pub fn diagram(&mut self, inputs: &[SystemLabel], depth: usize) -> Diagram {
        let mut d = Diagram::identity_on(inputs);
        for _ in 0..depth {
            let l = self.layer(d.outputs());
            d = seq(&d, &l).unwrap();
            let w = self.max_width;
            if d.outputs().len() > w {
                let outs = d.outputs().to_vec();
                let trim = par_all([&Diagram::identity_on(&outs[..w]), &Diagram::discard_all(&outs[w..])]);
                d = seq(&d, &trim).unwrap();
            }
        }
        d
    }
}

pub fn complex(m: &ConcreteMap) -> DMatrix<Complex64> {
    match m.matrix() {
        MapMatrix::Real(r) => r.map(|x| Complex64::new(x, 0.0)),
        MapMatrix::Complex(c) => c.clone(),
    }
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A random network on a random poset with `2..=max_nodes` elements. Wires
/// only run upward along the order; about half the eligible inputs get one.
pub fn random_network(seed: u64, max_nodes: usize) -> (causalkit::causal::CausalProcessNetwork, Interpretation) {
    use causalkit::causal::{CausalProcessNetwork, CausalStructure, NetworkWire, PortRef};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.4) {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let structure = CausalStructure::validate_structure(&names, &edges).unwrap();
    let mut interp = Interpretation::new(Backend::FinStoch);
    interp.set_dim("A", 2).unwrap();
    interp.set_dim("B", 3).unwrap();
    let mut g = Gen::new(seed.wrapping_mul(31), &mut interp);
    let mut processes = Vec::new();
    let mut free: Vec<(PortRef, SystemLabel)> = Vec::new();
    let mut wires = Vec::new();
    for j in 0..n {
        let pick = |rng: &mut ChaCha8Rng| -> Vec<SystemLabel> {
            (0..rng.random_range(0..=2)).map(|_| lab(["A", "B"][rng.random_range(0..2)])).collect()
        };
        let ins = pick(&mut rng);
        let outs = pick(&mut rng);
        for (port, l) in ins.iter().enumerate() {
            let candidates: Vec<usize> = (0..free.len())
                .filter(|&k| free[k].1 == *l && structure.less(free[k].0.node, j))
                .collect();
            if !candidates.is_empty() && rng.random_bool(0.5) {
                let (from, _) = free.remove(candidates[rng.random_range(0..candidates.len())]);
                wires.push(NetworkWire {
                    from,
                    to: PortRef { node: j, port },
                });
            }
        }
        for (port, l) in outs.iter().enumerate() {
            free.push((PortRef { node: j, port }, l.clone()));
        }
        processes.push(g.boxed(ins, outs));
    }
    (CausalProcessNetwork::new(structure, processes, wires).unwrap(), interp)
}
