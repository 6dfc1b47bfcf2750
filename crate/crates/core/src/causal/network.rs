use std::collections::BTreeSet;

use super::{CausalError, CausalStructure};
use crate::diagram::{Diagram, DiagramBuilder, SystemLabel};

/// A port of a node in a network: an input or output index of the process
/// placed on element `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: usize,
    pub port: usize,
}

/// An internal wire from an output port to an input port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetworkWire {
    pub from: PortRef,
    pub to: PortRef,
}

/// Processes placed on the elements of a causal structure, with wires
/// running strictly upward in the order. Ports not touched by any wire are
/// open.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalProcessNetwork {
    structure: CausalStructure,
    processes: Vec<Diagram>,
    wires: Vec<NetworkWire>,
}

/// A flattened network and, for each boundary port of the diagram, the node
/// port it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatNetwork {
    pub diagram: Diagram,
    pub inputs: Vec<PortRef>,
    pub outputs: Vec<PortRef>,
}

/// A coarse-grained network with the provenance of every cluster port.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrained {
    pub network: CausalProcessNetwork,
    /// For each cluster node, the original port behind each of its inputs.
    pub input_origin: Vec<Vec<PortRef>>,
    pub output_origin: Vec<Vec<PortRef>>,
}

impl CoarseGrained {
    /// Original ports behind the boundary of the flattened coarse network.
    pub fn original_boundary(&self) -> Result<(Vec<PortRef>, Vec<PortRef>), CausalError> {
        let flat = self.network.flatten()?;
        let ins = flat
            .inputs
            .iter()
            .map(|p| self.input_origin[p.node][p.port])
            .collect();
        let outs = flat
            .outputs
            .iter()
            .map(|p| self.output_origin[p.node][p.port])
            .collect();
        Ok((ins, outs))
    }
}

impl CausalProcessNetwork {
    pub fn new(
        structure: CausalStructure,
        processes: Vec<Diagram>,
        wires: Vec<NetworkWire>,
    ) -> Result<Self, CausalError> {
        if processes.len() != structure.len() {
            return Err(CausalError::ProcessCount {
                elements: structure.len(),
                processes: processes.len(),
            });
        }
        for (n, p) in processes.iter().enumerate() {
            let v = p.well_formed();
            if !v.is_empty() {
                return Err(CausalError::MalformedProcess {
                    node: structure.elements()[n].clone(),
                    detail: v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
                });
            }
        }
        let name = |p: PortRef| structure.elements()[p.node].clone();
        let mut used_out = BTreeSet::new();
        let mut used_in = BTreeSet::new();
        for w in &wires {
            if w.from.node >= processes.len() || w.to.node >= processes.len() {
                return Err(CausalError::PortOutOfRange(format!("{w:?}")));
            }
            let src = processes[w.from.node].outputs().get(w.from.port).ok_or_else(|| {
                CausalError::PortOutOfRange(format!("{}.out{}", name(w.from), w.from.port))
            })?;
            let dst = processes[w.to.node].inputs().get(w.to.port).ok_or_else(|| {
                CausalError::PortOutOfRange(format!("{}.in{}", name(w.to), w.to.port))
            })?;
            if src != dst {
                return Err(CausalError::LabelMismatch {
                    from: format!("{}.out{}", name(w.from), w.from.port),
                    to: format!("{}.in{}", name(w.to), w.to.port),
                    detail: format!("{src} vs {dst}"),
                });
            }
            if !structure.less(w.from.node, w.to.node) {
                return Err(CausalError::AgainstOrder {
                    from: name(w.from),
                    to: name(w.to),
                });
            }
            if !used_out.insert(w.from) {
                return Err(CausalError::PortReused(format!("{}.out{}", name(w.from), w.from.port)));
            }
            if !used_in.insert(w.to) {
                return Err(CausalError::PortReused(format!("{}.in{}", name(w.to), w.to.port)));
            }
        }
        Ok(CausalProcessNetwork {
            structure,
            processes,
            wires,
        })
    }

    pub fn structure(&self) -> &CausalStructure {
        &self.structure
    }

    pub fn processes(&self) -> &[Diagram] {
        &self.processes
    }

    pub fn wires(&self) -> &[NetworkWire] {
        &self.wires
    }

    /// Open input ports in (topological node order, port order).
    pub fn open_inputs(&self) -> Vec<PortRef> {
        self.open_inputs_in(&self.structure.topological_order(false))
    }

    pub fn open_outputs(&self) -> Vec<PortRef> {
        self.open_outputs_in(&self.structure.topological_order(false))
    }

    fn open_inputs_in(&self, order: &[usize]) -> Vec<PortRef> {
        let wired: BTreeSet<PortRef> = self.wires.iter().map(|w| w.to).collect();
        order
            .iter()
            .flat_map(|&node| (0..self.processes[node].inputs().len()).map(move |port| PortRef { node, port }))
            .filter(|p| !wired.contains(p))
            .collect()
    }

    fn open_outputs_in(&self, order: &[usize]) -> Vec<PortRef> {
        let wired: BTreeSet<PortRef> = self.wires.iter().map(|w| w.from).collect();
        order
            .iter()
            .flat_map(|&node| (0..self.processes[node].outputs().len()).map(move |port| PortRef { node, port }))
            .filter(|p| !wired.contains(p))
            .collect()
    }

    /// Read the network as a single diagram whose boundary collects the
    /// open ports.
    pub fn flatten(&self) -> Result<FlatNetwork, CausalError> {
        let order = self.structure.topological_order(false);
        let inputs = self.open_inputs_in(&order);
        let outputs = self.open_outputs_in(&order);
        let in_labels: Vec<SystemLabel> = inputs
            .iter()
            .map(|p| self.processes[p.node].inputs()[p.port].clone())
            .collect();
        let out_labels: Vec<SystemLabel> = outputs
            .iter()
            .map(|p| self.processes[p.node].outputs()[p.port].clone())
            .collect();
        let mut b = DiagramBuilder::new(in_labels, out_labels);
        let mut embedded: Vec<Option<crate::diagram::Embedded>> =
            (0..self.processes.len()).map(|_| None).collect();
        for &n in &order {
            embedded[n] = Some(b.inline(&self.processes[n]));
        }
        let pins = |p: PortRef, input: bool| {
            let e = embedded[p.node].as_ref().expect("every node is inlined");
            if input {
                e.inputs[p.port]
            } else {
                e.outputs[p.port]
            }
        };
        for w in &self.wires {
            b.connect(pins(w.from, false), pins(w.to, true));
        }
        for (i, &p) in inputs.iter().enumerate() {
            b.connect(b.input_pin(i), pins(p, true));
        }
        for (j, &p) in outputs.iter().enumerate() {
            b.connect(pins(p, false), b.output_pin(j));
        }
        let diagram = b.finish()?;
        Ok(FlatNetwork {
            diagram,
            inputs,
            outputs,
        })
    }

    /// The sub-network on `nodes` (in the given order) with the wires
    /// internal to it.
    pub fn induced(&self, nodes: &[usize]) -> CausalProcessNetwork {
        let structure = self.structure.induced(nodes);
        let local = |n: usize| nodes.iter().position(|&m| m == n);
        let wires = self
            .wires
            .iter()
            .filter_map(|w| {
                Some(NetworkWire {
                    from: PortRef {
                        node: local(w.from.node)?,
                        port: w.from.port,
                    },
                    to: PortRef {
                        node: local(w.to.node)?,
                        port: w.to.port,
                    },
                })
            })
            .collect();
        CausalProcessNetwork {
            structure,
            processes: nodes.iter().map(|&n| self.processes[n].clone()).collect(),
            wires,
        }
    }

    /// Collapse clusters (`cluster_of[element]`, clusters named by `names`)
    /// into single nodes whose processes are the flattened sub-networks.
    pub fn coarse_grain(&self, cluster_of: &[usize], names: Vec<String>) -> Result<CoarseGrained, CausalError> {
        let quotient = self.structure.coarse_grain_by(cluster_of, names)?;
        let k = quotient.structure.len();
        let members: Vec<Vec<usize>> = (0..k)
            .map(|c| (0..self.processes.len()).filter(|&n| cluster_of[n] == c).collect())
            .collect();
        let mut processes = Vec::with_capacity(k);
        let mut input_origin = Vec::with_capacity(k);
        let mut output_origin = Vec::with_capacity(k);
        for m in &members {
            let flat = self.induced(m).flatten()?;
            let lift = |p: &PortRef| PortRef {
                node: m[p.node],
                port: p.port,
            };
            input_origin.push(flat.inputs.iter().map(lift).collect::<Vec<_>>());
            output_origin.push(flat.outputs.iter().map(lift).collect::<Vec<_>>());
            processes.push(flat.diagram);
        }
        let find = |origin: &[Vec<PortRef>], p: PortRef| {
            let c = cluster_of[p.node];
            PortRef {
                node: c,
                port: origin[c].iter().position(|&q| q == p).expect("cut wire ends are cluster ports"),
            }
        };
        let wires = self
            .wires
            .iter()
            .filter(|w| cluster_of[w.from.node] != cluster_of[w.to.node])
            .map(|w| NetworkWire {
                from: find(&output_origin, w.from),
                to: find(&input_origin, w.to),
            })
            .collect();
        let network = CausalProcessNetwork::new(quotient.structure, processes, wires)?;
        Ok(CoarseGrained {
            network,
            input_origin,
            output_origin,
        })
    }
}

/// The diagram read off a causal process network.
pub fn network_to_diagram(net: &CausalProcessNetwork) -> Result<Diagram, CausalError> {
    Ok(net.flatten()?.diagram)
}
