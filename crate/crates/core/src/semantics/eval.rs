use std::collections::HashMap;

use nalgebra::DMatrix;

use super::linalg::{self, product, Scalar};
use super::{Backend, ConcreteMap, Interpretation, MapMatrix, SemanticsError};
use crate::diagram::{BoxSignature, Diagram, Source, Target};

/// Tie-breaking rule among nodes that are ready at the same time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalOrder {
    #[default]
    LowestFirst,
    HighestFirst,
}

/// Evaluate `d` to the matrix of the composite map.
pub fn evaluate(d: &Diagram, interp: &Interpretation) -> Result<ConcreteMap, SemanticsError> {
    evaluate_with(d, interp, EvalOrder::LowestFirst)
}

pub fn evaluate_with(
    d: &Diagram,
    interp: &Interpretation,
    order: EvalOrder,
) -> Result<ConcreteMap, SemanticsError> {
    let violations = d.well_formed();
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(SemanticsError::Malformed(msgs.join("; ")));
    }
    let in_dims = interp.dims_of(d.inputs())?;
    let out_dims = interp.dims_of(d.outputs())?;
    let matrix = match interp.backend() {
        Backend::FinStoch => MapMatrix::Real(contract(d, interp, order, |s| interp.real_matrix(s))?),
        Backend::Quantum => {
            MapMatrix::Complex(contract(d, interp, order, |s| interp.transfer_matrix(s))?)
        }
    };
    Ok(match matrix {
        MapMatrix::Real(m) => ConcreteMap::real(in_dims, out_dims, m),
        MapMatrix::Complex(m) => ConcreteMap::transfer(in_dims, out_dims, m),
    })
}

/// Contract the nodes of `d` one at a time. The running matrix maps the
/// boundary inputs to the tensor product of the currently open wires.
fn contract<T: Scalar>(
    d: &Diagram,
    interp: &Interpretation,
    order: EvalOrder,
    node_matrix: impl Fn(&BoxSignature) -> Result<DMatrix<T>, SemanticsError>,
) -> Result<DMatrix<T>, SemanticsError> {
    let nodes = d
        .topological_order(order == EvalOrder::HighestFirst)
        .ok_or_else(|| SemanticsError::Malformed("cyclic diagram".into()))?;
    let feeds: HashMap<Target, Source> = d.wires().iter().map(|w| (w.target, w.source)).collect();

    let mut live: Vec<(Source, usize)> = Vec::with_capacity(d.inputs().len());
    for (i, l) in d.inputs().iter().enumerate() {
        live.push((Source::Input(i), interp.wire_dim(l)?));
    }
    let mut m: DMatrix<T> = linalg::identity(product(&live.iter().map(|l| l.1).collect::<Vec<_>>()));

    for n in nodes {
        let sig = &d.nodes()[n];
        let op = node_matrix(sig)?;
        let in_wire: Vec<usize> = sig
            .inputs()
            .iter()
            .map(|l| interp.wire_dim(l))
            .collect::<Result<_, _>>()?;
        let out_wire: Vec<usize> = sig
            .outputs()
            .iter()
            .map(|l| interp.wire_dim(l))
            .collect::<Result<_, _>>()?;
        if op.shape() != (product(&out_wire), product(&in_wire)) {
            return Err(SemanticsError::DimensionMismatch {
                location: format!("node n{n} (`{}`)", sig.name()),
                detail: format!(
                    "matrix is {}x{}, ports need {}x{}",
                    op.nrows(),
                    op.ncols(),
                    product(&out_wire),
                    product(&in_wire)
                ),
            });
        }
        let positions: Vec<usize> = (0..sig.inputs().len())
            .map(|port| {
                let src = feeds[&Target::Node { node: n, port }];
                live.iter()
                    .position(|(s, _)| *s == src)
                    .expect("well-formed diagrams feed every input from a live wire")
            })
            .collect();
        let dims: Vec<usize> = live.iter().map(|l| l.1).collect();
        m = linalg::apply_to_legs(&m, &dims, &positions, &op);
        let mut k = 0;
        live.retain(|_| {
            k += 1;
            !positions.contains(&(k - 1))
        });
        live.extend(
            out_wire
                .iter()
                .enumerate()
                .map(|(port, &dim)| (Source::Node { node: n, port }, dim)),
        );
    }

    let perm: Vec<usize> = (0..d.outputs().len())
        .map(|j| {
            let src = feeds[&Target::Output(j)];
            live.iter()
                .position(|(s, _)| *s == src)
                .expect("every boundary output is fed by a live wire")
        })
        .collect();
    debug_assert_eq!(perm.len(), live.len());
    let dims: Vec<usize> = live.iter().map(|l| l.1).collect();
    Ok(linalg::permute_rows(&m, &dims, &perm))
}
