//! Causal structures (finite posets), causal process networks over them,
//! coarse-graining, and reduction to the two-party diamond.

mod diamond;
mod network;
mod poset;

use thiserror::Error;

use crate::diagram::DiagramError;
pub use diamond::{diamond_normal_form, random_diamond, DiamondNetwork, PartyPorts};
pub use network::{network_to_diagram, CausalProcessNetwork, CoarseGrained, FlatNetwork, NetworkWire, PortRef};
pub use poset::{CausalStructure, Quotient};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CausalError {
    #[error("cycle detected: {}", .0.join(" < "))]
    Cycle(Vec<String>),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element `{0}` is declared twice")]
    DuplicateElement(String),
    #[error("element `{0}` is missing from the partition")]
    PartitionIncomplete(String),
    #[error("clustering is not a partial order: {} (witnesses {witnesses:?})", .clusters.join(" < "))]
    QuotientCycle {
        clusters: Vec<String>,
        witnesses: Vec<(String, String)>,
    },
    #[error("{processes} processes for {elements} elements")]
    ProcessCount { elements: usize, processes: usize },
    #[error("process at `{node}` is malformed: {detail}")]
    MalformedProcess { node: String, detail: String },
    #[error("no such port {0}")]
    PortOutOfRange(String),
    #[error("wire {from} -> {to} joins different systems ({detail})")]
    LabelMismatch { from: String, to: String, detail: String },
    #[error("wire from `{from}` to `{to}` does not follow the order upward")]
    AgainstOrder { from: String, to: String },
    #[error("port {0} carries more than one wire")]
    PortReused(String),
    #[error("a party must contain at least one node")]
    EmptyParty,
    #[error("element `{0}` belongs to both parties")]
    PartiesOverlap(String),
    #[error("parties are comparable: `{lower}` < `{upper}` is a signalling channel")]
    PartiesComparable { lower: String, upper: String },
    #[error("no diamond reduction: `{node}` {detail}")]
    NoDiamondReduction { node: String, detail: String },
    #[error("not a diamond network: {0}")]
    NotADiamond(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}
