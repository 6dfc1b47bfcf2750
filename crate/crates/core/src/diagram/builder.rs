use std::sync::Arc;

use super::{BoxSignature, Diagram, DiagramError, Source, SystemLabel, Target, Wire};

/// Handle to a wire end inside a [`DiagramBuilder`].
pub(crate) type Pin = usize;

#[derive(Debug, Clone, Copy)]
enum Slot {
    In(usize),
    Out(usize),
    NodeIn(usize, usize),
    NodeOut(usize, usize),
    /// Boundary port of an inlined sub-diagram; passes a wire through.
    Virtual,
}

/// Boundary pins of a diagram inlined into a builder.
pub(crate) struct Embedded {
    pub inputs: Vec<Pin>,
    pub outputs: Vec<Pin>,
}

/// Assembles diagrams by gluing wire ends together. Every connection merges
/// two pins into one equivalence class; on [`finish`](Self::finish) each
/// class must contain exactly one real source and one real target, and
/// becomes a single wire.
pub(crate) struct DiagramBuilder {
    nodes: Vec<Arc<BoxSignature>>,
    inputs: Vec<SystemLabel>,
    outputs: Vec<SystemLabel>,
    slots: Vec<Slot>,
    parent: Vec<usize>,
}

impl DiagramBuilder {
    pub fn new(inputs: Vec<SystemLabel>, outputs: Vec<SystemLabel>) -> Self {
        let mut b = DiagramBuilder {
            nodes: Vec::new(),
            inputs,
            outputs,
            slots: Vec::new(),
            parent: Vec::new(),
        };
        for i in 0..b.inputs.len() {
            b.push(Slot::In(i));
        }
        for j in 0..b.outputs.len() {
            b.push(Slot::Out(j));
        }
        b
    }

    fn push(&mut self, s: Slot) -> Pin {
        self.slots.push(s);
        self.parent.push(self.parent.len());
        self.slots.len() - 1
    }

    pub fn input_pin(&self, i: usize) -> Pin {
        assert!(i < self.inputs.len());
        i
    }

    pub fn output_pin(&self, j: usize) -> Pin {
        assert!(j < self.outputs.len());
        self.inputs.len() + j
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn connect(&mut self, a: Pin, b: Pin) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }

    /// Copy `d`'s nodes and wires in; its boundary becomes virtual pins.
    pub fn inline(&mut self, d: &Diagram) -> Embedded {
        let offset = self.nodes.len();
        let mut node_in = Vec::with_capacity(d.nodes.len());
        let mut node_out = Vec::with_capacity(d.nodes.len());
        for (k, sig) in d.nodes.iter().enumerate() {
            let n = offset + k;
            self.nodes.push(sig.clone());
            node_in.push(
                (0..sig.inputs().len())
                    .map(|p| self.push(Slot::NodeIn(n, p)))
                    .collect::<Vec<_>>(),
            );
            node_out.push(
                (0..sig.outputs().len())
                    .map(|p| self.push(Slot::NodeOut(n, p)))
                    .collect::<Vec<_>>(),
            );
        }
        let inputs: Vec<Pin> = (0..d.inputs.len()).map(|_| self.push(Slot::Virtual)).collect();
        let outputs: Vec<Pin> = (0..d.outputs.len()).map(|_| self.push(Slot::Virtual)).collect();
        for w in &d.wires {
            let s = match w.source {
                Source::Input(i) => inputs[i],
                Source::Node { node, port } => node_out[node][port],
            };
            let t = match w.target {
                Target::Output(j) => outputs[j],
                Target::Node { node, port } => node_in[node][port],
            };
            self.connect(s, t);
        }
        Embedded { inputs, outputs }
    }

    pub fn add_node(&mut self, sig: Arc<BoxSignature>) -> Embedded {
        self.inline(&Diagram::single(sig))
    }

    pub fn finish(mut self) -> Result<Diagram, DiagramError> {
        let n = self.slots.len();
        let mut src: Vec<Option<Source>> = vec![None; n];
        let mut tgt: Vec<Option<Target>> = vec![None; n];
        for p in 0..n {
            let root = self.find(p);
            let (s, t) = match self.slots[p] {
                Slot::In(i) => (Some(Source::Input(i)), None),
                Slot::NodeOut(node, port) => (Some(Source::Node { node, port }), None),
                Slot::Out(j) => (None, Some(Target::Output(j))),
                Slot::NodeIn(node, port) => (None, Some(Target::Node { node, port })),
                Slot::Virtual => (None, None),
            };
            if let Some(s) = s {
                if src[root].replace(s).is_some() {
                    return Err(DiagramError::Malformed(format!("two sources joined at {s}")));
                }
            }
            if let Some(t) = t {
                if tgt[root].replace(t).is_some() {
                    return Err(DiagramError::Malformed(format!("two targets joined at {t}")));
                }
            }
        }
        let mut wires = Vec::new();
        for root in 0..n {
            if self.find(root) != root {
                continue;
            }
            match (src[root], tgt[root]) {
                (Some(source), Some(target)) => wires.push(Wire { source, target }),
                (None, None) => {}
                (Some(s), None) => {
                    return Err(DiagramError::Malformed(format!("source {s} is left open")))
                }
                (None, Some(t)) => {
                    return Err(DiagramError::Malformed(format!("target {t} is left open")))
                }
            }
        }
        wires.sort_by_key(|w| (w.source, w.target));
        let d = Diagram {
            nodes: self.nodes,
            wires,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        for w in &d.wires {
            let (s, t) = (d.source_label(w.source), d.target_label(w.target));
            if s != t {
                return Err(DiagramError::Malformed(format!(
                    "wire {} -> {} joins different systems",
                    w.source, w.target
                )));
            }
        }
        Ok(d)
    }
}
