//! The `.proc` language: systems, boxes bound to matrices, diagram
//! expressions, posets and networks.
//!
//! ```text
//! system A dim 2;
//! stoch f : A -> A (0.5 0.3 | 0.5 0.7);   # rows are outputs, columns inputs
//! diag d = f ; discard(A);                # `;` sequences, `*` juxtaposes
//! poset P { bot < top; }
//! network N on P { node bot = ...; node top = ...; wire bot.out0 -> top.in0; }
//! ```
//!
//! `chan` boxes give a Choi matrix with entries such as `0.5-0.5i`. A file
//! with any `chan` is interpreted in the quantum backend.

pub mod ast;
mod lexer;
mod parser;
mod printer;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::causal::{CausalProcessNetwork, CausalStructure, NetworkWire, PortRef};
use crate::diagram::{par_all, seq, BoxSignature, Diagram, Signature, Sort, SystemLabel};
use crate::semantics::{Backend, Binding, Interpretation, QuantumChannel, StochasticMap};
use ast::{Decl, Expr, ExprKind, Name, SourceFile};
pub use lexer::{lex, Tok, Token};
pub use parser::{parse_source, KEYWORDS};
pub use printer::print_source;

/// A 1-based source position with its byte offset. Positions do not take
/// part in equality, so parsed trees compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
    pub message: String,
    /// Tokens that would have been accepted; empty for semantic errors.
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: Span, message: String, expected: Vec<String>) -> Self {
        ParseError {
            line: span.line,
            column: span.column,
            offset: span.offset,
            message,
            expected,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed and checked source file.
#[derive(Debug, Clone)]
pub struct Document {
    pub source: SourceFile,
    signature: Signature,
    interp: Interpretation,
    diagrams: Vec<(String, Diagram)>,
    posets: Vec<(String, CausalStructure)>,
    networks: Vec<(String, CausalProcessNetwork)>,
    checks: Vec<(String, Option<String>)>,
}

/// Parse and check a `.proc` source.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    lower(parse_source(text)?)
}

impl Document {
    pub fn backend(&self) -> Backend {
        self.interp.backend()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn interpretation(&self) -> &Interpretation {
        &self.interp
    }

    pub fn interpretation_mut(&mut self) -> &mut Interpretation {
        &mut self.interp
    }

    pub fn diagram(&self, name: &str) -> Option<&Diagram> {
        self.diagrams.iter().find(|d| d.0 == name).map(|d| &d.1)
    }

    pub fn diagrams(&self) -> &[(String, Diagram)] {
        &self.diagrams
    }

    pub fn structure(&self, name: &str) -> Option<&CausalStructure> {
        self.posets.iter().find(|d| d.0 == name).map(|d| &d.1)
    }

    pub fn posets(&self) -> &[(String, CausalStructure)] {
        &self.posets
    }

    pub fn network(&self, name: &str) -> Option<&CausalProcessNetwork> {
        self.networks.iter().find(|d| d.0 == name).map(|d| &d.1)
    }

    pub fn networks(&self) -> &[(String, CausalProcessNetwork)] {
        &self.networks
    }

    /// `(kind, target)` of every `check` directive, in order.
    pub fn checks(&self) -> &[(String, Option<String>)] {
        &self.checks
    }

    /// Declared boxes, in declaration order.
    pub fn generators(&self) -> Vec<Arc<BoxSignature>> {
        self.signature.boxes().cloned().collect()
    }

    /// A diagram by name: a `diag`, a box, or a flattened network.
    pub fn resolve(&self, name: &str) -> Option<Diagram> {
        if let Some(d) = self.diagram(name) {
            return Some(d.clone());
        }
        if let Ok(b) = self.signature.get_box(name) {
            return Some(Diagram::single(b.clone()));
        }
        self.network(name).and_then(|n| n.flatten().ok()).map(|f| f.diagram)
    }

    /// Canonical source text.
    pub fn print(&self) -> String {
        print_source(&self.source)
    }
}

fn err(span: Span, message: impl Into<String>) -> ParseError {
    ParseError::new(span, message.into(), vec![])
}

struct Lowering {
    signature: Signature,
    interp: Interpretation,
    declared: HashMap<String, Span>,
    diagrams: Vec<(String, Diagram)>,
    posets: Vec<(String, CausalStructure)>,
    networks: Vec<(String, CausalProcessNetwork)>,
    checks: Vec<(String, Option<String>)>,
}

/// Check a parsed file and build its signature, interpretation and named
/// entities.
pub fn lower(source: SourceFile) -> Result<Document, ParseError> {
    let quantum = source.decls.iter().any(|d| matches!(d, Decl::Chan { .. }));
    let mut l = Lowering {
        signature: Signature::new(),
        interp: Interpretation::new(if quantum { Backend::Quantum } else { Backend::FinStoch }),
        declared: HashMap::new(),
        diagrams: Vec::new(),
        posets: Vec::new(),
        networks: Vec::new(),
        checks: Vec::new(),
    };
    for d in &source.decls {
        l.decl(d)?;
    }
    Ok(Document {
        source,
        signature: l.signature,
        interp: l.interp,
        diagrams: l.diagrams,
        posets: l.posets,
        networks: l.networks,
        checks: l.checks,
    })
}

impl Lowering {
    fn declare(&mut self, name: &Name) -> Result<(), ParseError> {
        if let Some(prev) = self.declared.get(&name.text) {
            return Err(err(
                name.span,
                format!("`{}` is already declared at line {}", name.text, prev.line),
            ));
        }
        self.declared.insert(name.text.clone(), name.span);
        Ok(())
    }

    fn label(&self, n: &Name) -> Result<SystemLabel, ParseError> {
        self.signature
            .system(&n.text)
            .cloned()
            .map_err(|_| err(n.span, format!("unknown system `{}`", n.text)))
    }

    fn decl(&mut self, d: &Decl) -> Result<(), ParseError> {
        if let Some(name) = d.name() {
            self.declare(name)?;
        }
        match d {
            Decl::System { name, dim, sort } => {
                self.signature
                    .declare_system(&name.text, sort.unwrap_or(Sort::Normal))
                    .map_err(|e| err(name.span, e.to_string()))?;
                self.interp
                    .set_dim(&name.text, *dim)
                    .map_err(|e| err(name.span, e.to_string()))?;
            }
            Decl::Stoch {
                name,
                inputs,
                outputs,
                rows,
            } => {
                let sig = self.box_sig(name, inputs, outputs)?;
                let m = StochasticMap::from_rows(rows).map_err(|e| err(name.span, e.to_string()))?;
                self.interp
                    .bind(&sig, Binding::Stochastic(m))
                    .map_err(|e| err(name.span, format!("box `{}`: {e}", name.text)))?;
            }
            Decl::Chan {
                name,
                inputs,
                outputs,
                rows,
            } => {
                let sig = self.box_sig(name, inputs, outputs)?;
                let n = rows.len();
                let m = DMatrix::<Complex64>::from_fn(n, rows[0].len(), |i, j| rows[i][j]);
                let dims = |ls: &[SystemLabel]| self.interp.dims_of(ls).map_err(|e| err(name.span, e.to_string()));
                let c = QuantumChannel::from_choi(m, dims(sig.inputs())?, dims(sig.outputs())?)
                    .map_err(|e| err(name.span, format!("box `{}`: {e}", name.text)))?;
                self.interp
                    .bind(&sig, Binding::Channel(c))
                    .map_err(|e| err(name.span, format!("box `{}`: {e}", name.text)))?;
            }
            Decl::Diag { name, expr } => {
                let d = self.expr(expr)?;
                self.diagrams.push((name.text.clone(), d));
            }
            Decl::Poset { name, elements, edges } => {
                let els: Vec<&str> = elements.iter().map(|e| e.text.as_str()).collect();
                let es: Vec<(&str, &str)> = edges.iter().map(|(x, y)| (x.text.as_str(), y.text.as_str())).collect();
                let cs = CausalStructure::validate_structure(&els, &es)
                    .map_err(|e| err(name.span, format!("poset `{}`: {e}", name.text)))?;
                self.posets.push((name.text.clone(), cs));
            }
            Decl::Network {
                name,
                poset,
                nodes,
                wires,
            } => {
                let net = self.network(name, poset, nodes, wires)?;
                self.networks.push((name.text.clone(), net));
            }
            Decl::Check { kind, target } => {
                if let Some(t) = target {
                    if !self.declared.contains_key(&t.text) {
                        return Err(err(t.span, format!("unknown entity `{}`", t.text)));
                    }
                }
                self.checks.push((kind.text.clone(), target.as_ref().map(|t| t.text.clone())));
            }
        }
        Ok(())
    }

    fn box_sig(&mut self, name: &Name, inputs: &[Name], outputs: &[Name]) -> Result<Arc<BoxSignature>, ParseError> {
        for n in inputs.iter().chain(outputs) {
            self.label(n)?;
        }
        let ins: Vec<&str> = inputs.iter().map(|n| n.text.as_str()).collect();
        let outs: Vec<&str> = outputs.iter().map(|n| n.text.as_str()).collect();
        self.signature
            .declare_box(&name.text, &ins, &outs)
            .map_err(|e| err(name.span, e.to_string()))
    }

    fn expr(&self, e: &Expr) -> Result<Diagram, ParseError> {
        Ok(match &e.kind {
            ExprKind::Name(n) => {
                if let Some(d) = self.diagrams.iter().find(|d| &d.0 == n) {
                    d.1.clone()
                } else if let Ok(b) = self.signature.get_box(n) {
                    Diagram::single(b.clone())
                } else {
                    return Err(err(e.span, format!("unknown diagram or box `{n}`")));
                }
            }
            ExprKind::Id(a) => Diagram::identity(&self.label(a)?),
            ExprKind::Swap(a, b) => Diagram::swap(&self.label(a)?, &self.label(b)?),
            ExprKind::Discard(a) => Diagram::discard(&self.label(a)?),
            ExprKind::Uniform(a) => Diagram::uniform(&self.label(a)?),
            ExprKind::Paren(inner) => self.expr(inner)?,
            ExprKind::Par(parts) => {
                let ds = parts.iter().map(|p| self.expr(p)).collect::<Result<Vec<_>, _>>()?;
                par_all(&ds)
            }
            ExprKind::Seq(parts) => {
                let mut acc = self.expr(&parts[0])?;
                for p in &parts[1..] {
                    let next = self.expr(p)?;
                    acc = seq(&acc, &next).map_err(|x| err(p.span, x.to_string()))?;
                }
                acc
            }
        })
    }

    fn network(
        &self,
        name: &Name,
        poset: &Name,
        nodes: &[(Name, Expr)],
        wires: &[(ast::PortName, ast::PortName)],
    ) -> Result<CausalProcessNetwork, ParseError> {
        let cs = self
            .posets
            .iter()
            .find(|p| p.0 == poset.text)
            .map(|p| p.1.clone())
            .ok_or_else(|| err(poset.span, format!("unknown poset `{}`", poset.text)))?;
        let mut processes: Vec<Option<Diagram>> = vec![None; cs.len()];
        for (n, e) in nodes {
            let i = cs
                .index_of(&n.text)
                .map_err(|_| err(n.span, format!("`{}` is not an element of `{}`", n.text, poset.text)))?;
            if processes[i].is_some() {
                return Err(err(n.span, format!("node `{}` is assigned twice", n.text)));
            }
            processes[i] = Some(self.expr(e)?);
        }
        let processes = processes
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| err(name.span, format!("node `{}` has no process", cs.elements()[i]))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ws = Vec::with_capacity(wires.len());
        for (from, to) in wires {
            let port = |p: &ast::PortName, output: bool| -> Result<PortRef, ParseError> {
                if p.output != output {
                    let want = if output { "an output `outN`" } else { "an input `inN`" };
                    return Err(err(p.node.span, format!("wire endpoint must be {want}")));
                }
                let node = cs
                    .index_of(&p.node.text)
                    .map_err(|_| err(p.node.span, format!("`{}` is not an element of `{}`", p.node.text, poset.text)))?;
                Ok(PortRef { node, port: p.port })
            };
            ws.push(NetworkWire {
                from: port(from, true)?,
                to: port(to, false)?,
            });
        }
        CausalProcessNetwork::new(cs, processes, ws).map_err(|e| err(name.span, format!("network `{}`: {e}", name.text)))
    }
}
