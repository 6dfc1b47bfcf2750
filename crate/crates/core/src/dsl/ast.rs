use num_complex::Complex64;

use super::Span;
use crate::diagram::Sort;

/// A named thing together with where it was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

impl Name {
    pub fn new(text: &str) -> Self {
        Name {
            text: text.to_string(),
            span: Span::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// Two or more parts composed in sequence.
    Seq(Vec<Expr>),
    /// Two or more parts side by side.
    Par(Vec<Expr>),
    Name(String),
    Id(Name),
    Swap(Name, Name),
    Discard(Name),
    Uniform(Name),
    Paren(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortName {
    pub node: Name,
    /// `true` for `outK`, `false` for `inK`.
    pub output: bool,
    pub port: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    System {
        name: Name,
        dim: usize,
        sort: Option<Sort>,
    },
    Stoch {
        name: Name,
        inputs: Vec<Name>,
        outputs: Vec<Name>,
        rows: Vec<Vec<f64>>,
    },
    Chan {
        name: Name,
        inputs: Vec<Name>,
        outputs: Vec<Name>,
        rows: Vec<Vec<Complex64>>,
    },
    Diag {
        name: Name,
        expr: Expr,
    },
    Poset {
        name: Name,
        /// Every element, in order of first appearance.
        elements: Vec<Name>,
        /// Relations sorted by name, without repeats.
        edges: Vec<(Name, Name)>,
    },
    Network {
        name: Name,
        poset: Name,
        nodes: Vec<(Name, Expr)>,
        wires: Vec<(PortName, PortName)>,
    },
    Check {
        kind: Name,
        target: Option<Name>,
    },
}

impl Decl {
    /// The declared name; check directives declare nothing.
    pub fn name(&self) -> Option<&Name> {
        match self {
            Decl::System { name, .. }
            | Decl::Stoch { name, .. }
            | Decl::Chan { name, .. }
            | Decl::Diag { name, .. }
            | Decl::Poset { name, .. }
            | Decl::Network { name, .. } => Some(name),
            Decl::Check { .. } => None,
        }
    }
}

/// A parsed source file: declarations in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}
