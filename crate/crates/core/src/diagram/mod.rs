//! String diagrams over typed wires.
//!
//! A [`Diagram`] is an open graph: box instances (nodes) with ordered input
//! and output ports, an ordered list of open boundary inputs and outputs, and
//! wires that each connect exactly one *source* (a boundary input or a node
//! output) to exactly one *target* (a node input or a boundary output). The
//! identity on `A` is therefore a diagram with no nodes and a single wire
//! from boundary input 0 to boundary output 0.
//!
//! Diagrams are immutable values: [`seq`] and [`par`] return new diagrams.

pub(crate) mod builder;
mod signature;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use builder::{DiagramBuilder, Embedded};
pub use signature::{Primitive, Signature};

/// Wire sort. Exotic wires model the "bold" internal systems of a two-sorted
/// theory; normal wires carry probabilities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    #[default]
    Normal,
    Exotic,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Normal => f.write_str("normal"),
            Sort::Exotic => f.write_str("exotic"),
        }
    }
}

/// A named system type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemLabel {
    name: Arc<str>,
    sort: Sort,
}

impl SystemLabel {
    pub fn new(name: &str, sort: Sort) -> Self {
        SystemLabel {
            name: Arc::from(name),
            sort,
        }
    }

    pub fn normal(name: &str) -> Self {
        Self::new(name, Sort::Normal)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxKind {
    Generator,
    Identity,
    Swap,
    Discard,
    /// The normalised uniform state (maximally mixed in the quantum backend).
    Uniform,
}

/// The type of a box: its name, ordered input and output systems, and kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxSignature {
    name: String,
    inputs: Vec<SystemLabel>,
    outputs: Vec<SystemLabel>,
    kind: BoxKind,
}

impl BoxSignature {
    pub fn generator(name: &str, inputs: Vec<SystemLabel>, outputs: Vec<SystemLabel>) -> Self {
        BoxSignature {
            name: name.to_string(),
            inputs,
            outputs,
            kind: BoxKind::Generator,
        }
    }

    pub fn identity(a: &SystemLabel) -> Self {
        BoxSignature {
            name: format!("id[{a}]"),
            inputs: vec![a.clone()],
            outputs: vec![a.clone()],
            kind: BoxKind::Identity,
        }
    }

    pub fn swap(a: &SystemLabel, b: &SystemLabel) -> Self {
        BoxSignature {
            name: format!("swap[{a},{b}]"),
            inputs: vec![a.clone(), b.clone()],
            outputs: vec![b.clone(), a.clone()],
            kind: BoxKind::Swap,
        }
    }

    pub fn discard(a: &SystemLabel) -> Self {
        BoxSignature {
            name: format!("discard[{a}]"),
            inputs: vec![a.clone()],
            outputs: vec![],
            kind: BoxKind::Discard,
        }
    }

    pub fn uniform(a: &SystemLabel) -> Self {
        BoxSignature {
            name: format!("uniform[{a}]"),
            inputs: vec![],
            outputs: vec![a.clone()],
            kind: BoxKind::Uniform,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[SystemLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SystemLabel] {
        &self.outputs
    }

    pub fn kind(&self) -> BoxKind {
        self.kind
    }

    pub fn is_state(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn is_effect(&self) -> bool {
        self.outputs.is_empty()
    }
}

/// Where a wire starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Input(usize),
    Node { node: usize, port: usize },
}

/// Where a wire ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Output(usize),
    Node { node: usize, port: usize },
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Input(i) => write!(f, "in{i}"),
            Source::Node { node, port } => write!(f, "n{node}.out{port}"),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Output(j) => write!(f, "out{j}"),
            Target::Node { node, port } => write!(f, "n{node}.in{port}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wire {
    pub source: Source,
    pub target: Target,
}

/// A well-formedness violation reported by [`Diagram::well_formed`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle { node: usize },
    TypeMismatch { wire: usize, source: SystemLabel, target: SystemLabel },
    DanglingEndpoint { wire: usize },
    MultiplyAttached { port: String, wires: Vec<usize> },
    Unattached { port: String },
    ExoticBoundary { port: String, label: SystemLabel },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { node } => write!(f, "cycle at node n{node}"),
            Violation::TypeMismatch {
                wire,
                source,
                target,
            } => write!(f, "type mismatch on wire w{wire}: {source} -> {target}"),
            Violation::DanglingEndpoint { wire } => {
                write!(f, "wire w{wire} refers to a port that does not exist")
            }
            Violation::MultiplyAttached { port, wires } => {
                write!(f, "port {port} is attached to {} wires", wires.len())
            }
            Violation::Unattached { port } => write!(f, "port {port} is not attached to any wire"),
            Violation::ExoticBoundary { port, label } => {
                write!(f, "exotic system {label} on outer boundary port {port}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("unknown box `{0}`")]
    UnknownBox(String),
    #[error("system `{0}` is already declared")]
    DuplicateSystem(String),
    #[error("box `{0}` is already declared")]
    DuplicateBox(String),
    #[error(
        "cannot compose output {} with input {} (first mismatch at position {position})",
        fmt_labels(.outputs), fmt_labels(.inputs)
    )]
    BoundaryMismatch {
        position: usize,
        outputs: Vec<SystemLabel>,
        inputs: Vec<SystemLabel>,
    },
    #[error("malformed diagram: {0}")]
    Malformed(String),
}

pub(crate) fn fmt_labels(labels: &[SystemLabel]) -> String {
    let names: Vec<&str> = labels.iter().map(|l| l.name()).collect();
    format!("[{}]", names.join(","))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    nodes: Vec<Arc<BoxSignature>>,
    wires: Vec<Wire>,
    inputs: Vec<SystemLabel>,
    outputs: Vec<SystemLabel>,
}

impl Diagram {
    /// Assemble a diagram from raw parts without checking anything; use
    /// [`Diagram::well_formed`] to validate.
    pub fn from_parts(
        nodes: Vec<Arc<BoxSignature>>,
        wires: Vec<Wire>,
        inputs: Vec<SystemLabel>,
        outputs: Vec<SystemLabel>,
    ) -> Self {
        Diagram {
            nodes,
            wires,
            inputs,
            outputs,
        }
    }

    /// The empty diagram: no nodes, no wires, no boundary.
    pub fn empty() -> Self {
        Self::from_parts(vec![], vec![], vec![], vec![])
    }

    /// Identity on `a`, realised as a bare wire.
    pub fn identity(a: &SystemLabel) -> Self {
        Self::from_parts(
            vec![],
            vec![Wire {
                source: Source::Input(0),
                target: Target::Output(0),
            }],
            vec![a.clone()],
            vec![a.clone()],
        )
    }

    /// Identity on a list of systems.
    pub fn identity_on(labels: &[SystemLabel]) -> Self {
        let wires = (0..labels.len())
            .map(|i| Wire {
                source: Source::Input(i),
                target: Target::Output(i),
            })
            .collect();
        Self::from_parts(vec![], wires, labels.to_vec(), labels.to_vec())
    }

    /// A single box with every port on the boundary, in port order.
    pub fn single(sig: Arc<BoxSignature>) -> Self {
        let inputs = sig.inputs().to_vec();
        let outputs = sig.outputs().to_vec();
        let mut wires = Vec::with_capacity(inputs.len() + outputs.len());
        for port in 0..inputs.len() {
            wires.push(Wire {
                source: Source::Input(port),
                target: Target::Node { node: 0, port },
            });
        }
        for port in 0..outputs.len() {
            wires.push(Wire {
                source: Source::Node { node: 0, port },
                target: Target::Output(port),
            });
        }
        Self::from_parts(vec![sig], wires, inputs, outputs)
    }

    pub fn discard(a: &SystemLabel) -> Self {
        Self::single(Arc::new(BoxSignature::discard(a)))
    }

    /// Discard every system in `labels` (the empty diagram for an empty list).
    pub fn discard_all(labels: &[SystemLabel]) -> Self {
        labels
            .iter()
            .fold(Diagram::empty(), |acc, l| par(&acc, &Diagram::discard(l)))
    }

    pub fn swap(a: &SystemLabel, b: &SystemLabel) -> Self {
        Self::single(Arc::new(BoxSignature::swap(a, b)))
    }

    pub fn uniform(a: &SystemLabel) -> Self {
        Self::single(Arc::new(BoxSignature::uniform(a)))
    }

    pub fn nodes(&self) -> &[Arc<BoxSignature>] {
        &self.nodes
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn inputs(&self) -> &[SystemLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SystemLabel] {
        &self.outputs
    }

    /// Ordered open input and output systems.
    pub fn boundary(&self) -> (&[SystemLabel], &[SystemLabel]) {
        (&self.inputs, &self.outputs)
    }

    pub fn is_closed(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty()
    }

    /// Names of the generator boxes used, in node order (with repetitions).
    pub fn generator_names(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|n| n.kind() == BoxKind::Generator)
            .map(|n| n.name())
    }

    pub(crate) fn source_label(&self, s: Source) -> Option<&SystemLabel> {
        match s {
            Source::Input(i) => self.inputs.get(i),
            Source::Node { node, port } => self.nodes.get(node)?.outputs().get(port),
        }
    }

    pub(crate) fn target_label(&self, t: Target) -> Option<&SystemLabel> {
        match t {
            Target::Output(j) => self.outputs.get(j),
            Target::Node { node, port } => self.nodes.get(node)?.inputs().get(port),
        }
    }

    /// All violated invariants; empty iff the diagram is well formed.
    pub fn well_formed(&self) -> Vec<Violation> {
        self.check(false)
    }

    /// As [`Diagram::well_formed`], additionally forbidding exotic systems on
    /// the outer boundary.
    pub fn well_formed_strict(&self) -> Vec<Violation> {
        self.check(true)
    }

    fn check(&self, strict_sorts: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut by_source: Vec<(Source, usize)> = Vec::new();
        let mut by_target: Vec<(Target, usize)> = Vec::new();
        for (w, wire) in self.wires.iter().enumerate() {
            match (self.source_label(wire.source), self.target_label(wire.target)) {
                (Some(s), Some(t)) => {
                    if s != t {
                        out.push(Violation::TypeMismatch {
                            wire: w,
                            source: s.clone(),
                            target: t.clone(),
                        });
                    }
                    by_source.push((wire.source, w));
                    by_target.push((wire.target, w));
                }
                _ => out.push(Violation::DanglingEndpoint { wire: w }),
            }
        }

        let mut sources: Vec<Source> = (0..self.inputs.len()).map(Source::Input).collect();
        let mut targets: Vec<Target> = Vec::new();
        for (n, sig) in self.nodes.iter().enumerate() {
            sources.extend((0..sig.outputs().len()).map(|port| Source::Node { node: n, port }));
            targets.extend((0..sig.inputs().len()).map(|port| Target::Node { node: n, port }));
        }
        targets.extend((0..self.outputs.len()).map(Target::Output));

        for s in sources {
            let ws: Vec<usize> = by_source.iter().filter(|(x, _)| *x == s).map(|p| p.1).collect();
            match ws.len() {
                0 => out.push(Violation::Unattached { port: s.to_string() }),
                1 => {}
                _ => out.push(Violation::MultiplyAttached {
                    port: s.to_string(),
                    wires: ws,
                }),
            }
        }
        for t in targets {
            let ws: Vec<usize> = by_target.iter().filter(|(x, _)| *x == t).map(|p| p.1).collect();
            match ws.len() {
                0 => out.push(Violation::Unattached { port: t.to_string() }),
                1 => {}
                _ => out.push(Violation::MultiplyAttached {
                    port: t.to_string(),
                    wires: ws,
                }),
            }
        }

        if let Some(node) = self.first_cycle_node() {
            out.push(Violation::Cycle { node });
        }

        if strict_sorts {
            for (i, l) in self.inputs.iter().enumerate() {
                if l.sort() == Sort::Exotic {
                    out.push(Violation::ExoticBoundary {
                        port: format!("in{i}"),
                        label: l.clone(),
                    });
                }
            }
            for (j, l) in self.outputs.iter().enumerate() {
                if l.sort() == Sort::Exotic {
                    out.push(Violation::ExoticBoundary {
                        port: format!("out{j}"),
                        label: l.clone(),
                    });
                }
            }
        }
        out
    }

    /// Node-level successor lists (one entry per node-to-node wire).
    pub(crate) fn node_edges(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.nodes.len()];
        for w in &self.wires {
            if let (Source::Node { node: a, .. }, Target::Node { node: b, .. }) = (w.source, w.target) {
                if a < self.nodes.len() && b < self.nodes.len() {
                    succ[a].push(b);
                }
            }
        }
        succ
    }

    /// Smallest node index lying on a directed cycle, if any.
    fn first_cycle_node(&self) -> Option<usize> {
        let n = self.nodes.len();
        let succ = self.node_edges();
        // reach[i][j]: j reachable from i by a non-empty path
        let mut reach = vec![vec![false; n]; n];
        for (a, ss) in succ.iter().enumerate() {
            for &b in ss {
                reach[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        (0..n).find(|&i| reach[i][i])
    }

    /// Topological order of nodes. Among ready nodes the lowest index is
    /// taken first, or the highest when `reverse_ties` is set. `None` if the
    /// node graph is cyclic.
    pub fn topological_order(&self, reverse_ties: bool) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let succ = self.node_edges();
        let mut indeg = vec![0usize; n];
        for ss in &succ {
            for &b in ss {
                indeg[b] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&next) = if reverse_ties {
            ready.iter().next_back()
        } else {
            ready.iter().next()
        } {
            ready.remove(&next);
            order.push(next);
            for &b in &succ[next] {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.insert(b);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Reorder the boundary: new input `i` is old input `in_perm[i]`, and
    /// likewise for outputs.
    pub fn permute_boundary(&self, in_perm: &[usize], out_perm: &[usize]) -> Diagram {
        assert_eq!(in_perm.len(), self.inputs.len(), "input permutation length");
        assert_eq!(out_perm.len(), self.outputs.len(), "output permutation length");
        let mut in_pos = vec![0; in_perm.len()];
        for (new, &old) in in_perm.iter().enumerate() {
            in_pos[old] = new;
        }
        let mut out_pos = vec![0; out_perm.len()];
        for (new, &old) in out_perm.iter().enumerate() {
            out_pos[old] = new;
        }
        let wires = self
            .wires
            .iter()
            .map(|w| Wire {
                source: match w.source {
                    Source::Input(i) => Source::Input(in_pos[i]),
                    s => s,
                },
                target: match w.target {
                    Target::Output(j) => Target::Output(out_pos[j]),
                    t => t,
                },
            })
            .collect();
        Diagram {
            nodes: self.nodes.clone(),
            wires,
            inputs: in_perm.iter().map(|&i| self.inputs[i].clone()).collect(),
            outputs: out_perm.iter().map(|&j| self.outputs[j].clone()).collect(),
        }
    }
}

/// Sequential composition: the outputs of `first` feed the inputs of
/// `second`, position by position.
pub fn seq(first: &Diagram, second: &Diagram) -> Result<Diagram, DiagramError> {
    if first.outputs != second.inputs {
        let position = first
            .outputs
            .iter()
            .zip(&second.inputs)
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| first.outputs.len().min(second.inputs.len()));
        return Err(DiagramError::BoundaryMismatch {
            position,
            outputs: first.outputs.clone(),
            inputs: second.inputs.clone(),
        });
    }
    let mut b = DiagramBuilder::new(first.inputs.clone(), second.outputs.clone());
    let e1 = b.inline(first);
    let e2 = b.inline(second);
    for (i, &pin) in e1.inputs.iter().enumerate() {
        b.connect(b.input_pin(i), pin);
    }
    for (&o, &i) in e1.outputs.iter().zip(&e2.inputs) {
        b.connect(o, i);
    }
    for (j, &pin) in e2.outputs.iter().enumerate() {
        b.connect(pin, b.output_pin(j));
    }
    b.finish()
}

/// Parallel composition; boundaries concatenate left then right.
pub fn par(left: &Diagram, right: &Diagram) -> Diagram {
    let inputs: Vec<SystemLabel> = left.inputs.iter().chain(&right.inputs).cloned().collect();
    let outputs: Vec<SystemLabel> = left.outputs.iter().chain(&right.outputs).cloned().collect();
    let mut b = DiagramBuilder::new(inputs, outputs);
    let e1 = b.inline(left);
    let e2 = b.inline(right);
    for (i, &pin) in e1.inputs.iter().chain(&e2.inputs).enumerate() {
        b.connect(b.input_pin(i), pin);
    }
    for (j, &pin) in e1.outputs.iter().chain(&e2.outputs).enumerate() {
        b.connect(pin, b.output_pin(j));
    }
    b.finish()
        .expect("parallel composition of well-formed diagrams is well formed")
}

/// Parallel composition of a list (the empty diagram for an empty list).
pub fn par_all<'a>(ds: impl IntoIterator<Item = &'a Diagram>) -> Diagram {
    ds.into_iter().fold(Diagram::empty(), |acc, d| par(&acc, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> SystemLabel {
        SystemLabel::normal("A")
    }
    fn b() -> SystemLabel {
        SystemLabel::normal("B")
    }

    fn gen(name: &str, ins: &[SystemLabel], outs: &[SystemLabel]) -> Diagram {
        Diagram::single(Arc::new(BoxSignature::generator(name, ins.to_vec(), outs.to_vec())))
    }

    #[test]
    fn identity_is_a_bare_wire() {
        let id = Diagram::identity(&a());
        assert!(id.nodes().is_empty());
        assert_eq!(id.boundary(), (&[a()][..], &[a()][..]));
        assert!(id.well_formed().is_empty());
    }

    #[test]
    fn primitive_boundaries() {
        let d = Diagram::discard(&a());
        assert_eq!(d.boundary(), (&[a()][..], &[][..]));
        let s = Diagram::swap(&a(), &b());
        assert_eq!(s.boundary(), (&[a(), b()][..], &[b(), a()][..]));
        assert_eq!(Diagram::empty().boundary(), (&[][..], &[][..]));
    }

    #[test]
    fn seq_with_identity_is_structurally_the_other_side() {
        let d = seq(&Diagram::identity(&a()), &Diagram::discard(&a())).unwrap();
        assert_eq!(d, Diagram::discard(&a()));
        let f = gen("f", &[a()], &[b()]);
        let e = seq(&f, &Diagram::discard(&b())).unwrap();
        assert_eq!(e.boundary(), (&[a()][..], &[][..]));
        assert_eq!(e.nodes().len(), 2);
        assert!(e.well_formed().is_empty());
    }

    #[test]
    fn seq_mismatch_reports_position() {
        let err = seq(&Diagram::discard(&a()), &gen("f", &[a()], &[a()])).unwrap_err();
        match &err {
            DiagramError::BoundaryMismatch { position, .. } => assert_eq!(*position, 0),
            e => panic!("unexpected {e:?}"),
        }
        assert!(err.to_string().contains("cannot compose output [] with input [A]"));

        let ab = Diagram::identity_on(&[a(), b()]);
        let aa = Diagram::identity_on(&[a(), a()]);
        match seq(&ab, &aa).unwrap_err() {
            DiagramError::BoundaryMismatch { position, .. } => assert_eq!(position, 1),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn par_shapes() {
        let d = par(&Diagram::identity(&a()), &Diagram::identity(&b()));
        assert_eq!(d, Diagram::identity_on(&[a(), b()]));
        let d = par(&Diagram::discard(&a()), &Diagram::identity(&b()));
        assert_eq!(d.boundary(), (&[a(), b()][..], &[b()][..]));
        let f = gen("f", &[a()], &[a()]);
        let g = gen("g", &[b()], &[b()]);
        let d = par(&f, &g);
        assert_eq!(d.nodes().len(), 2);
        assert!(d.node_edges().iter().all(|s| s.is_empty()));
        let c = SystemLabel::normal("C");
        let d = par(&gen("f", &[a()], &[b()]), &Diagram::discard(&c));
        assert_eq!(d.boundary(), (&[a(), c.clone()][..], &[b()][..]));
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let f = Arc::new(BoxSignature::generator("f", vec![a(), a()], vec![a(), a()]));
        let d = Diagram::from_parts(
            vec![f],
            vec![
                Wire { source: Source::Input(0), target: Target::Node { node: 0, port: 0 } },
                Wire { source: Source::Node { node: 0, port: 0 }, target: Target::Node { node: 0, port: 1 } },
                Wire { source: Source::Node { node: 0, port: 1 }, target: Target::Output(0) },
            ],
            vec![a()],
            vec![a()],
        );
        assert_eq!(d.well_formed(), vec![Violation::Cycle { node: 0 }]);
        assert_eq!(d.well_formed()[0].to_string(), "cycle at node n0");
        assert!(d.topological_order(false).is_none());
    }

    #[test]
    fn mismatched_wire_is_flagged() {
        let d = Diagram::from_parts(
            vec![],
            vec![Wire { source: Source::Input(0), target: Target::Output(0) }],
            vec![a()],
            vec![b()],
        );
        let v = d.well_formed();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "type mismatch on wire w0: A -> B");
    }

    #[test]
    fn strict_sorts_forbid_exotic_boundary() {
        let x = SystemLabel::new("Q", Sort::Exotic);
        let d = Diagram::identity(&x);
        assert!(d.well_formed().is_empty());
        assert_eq!(d.well_formed_strict().len(), 2);
        let closed = seq(&Diagram::uniform(&x), &Diagram::discard(&x)).unwrap();
        assert!(closed.well_formed_strict().is_empty());
    }

    #[test]
    fn permute_boundary_moves_ports() {
        let d = par(&gen("f", &[a()], &[a()]), &Diagram::discard(&b()));
        let p = d.permute_boundary(&[1, 0], &[0]);
        assert_eq!(p.inputs(), &[b(), a()]);
        assert!(p.well_formed().is_empty());
        assert_eq!(p.permute_boundary(&[1, 0], &[0]), d);
    }
}
