use std::fmt::Write;

use num_complex::Complex64;

use super::ast::{Decl, Expr, ExprKind, Name, SourceFile};
use crate::diagram::Sort;

/// Shortest decimal form that reads back to the same double.
pub(crate) fn real(x: f64) -> String {
    format!("{x:?}")
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 && z.im.is_sign_positive() {
        real(z.re)
    } else if z.im.is_sign_negative() {
        format!("{}{}i", real(z.re), real(z.im))
    } else {
        format!("{}+{}i", real(z.re), real(z.im))
    }
}

fn names(ns: &[Name]) -> String {
    ns.iter().map(|n| n.text.as_str()).collect::<Vec<_>>().join(", ")
}

fn matrix<T>(rows: &[Vec<T>], f: impl Fn(&T) -> String) -> String {
    let rows: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(&f).collect::<Vec<_>>().join(" "))
        .collect();
    format!("({})", rows.join(" | "))
}

fn arrow(inputs: &[Name], outputs: &[Name]) -> String {
    let mut s = String::new();
    if !inputs.is_empty() {
        s.push_str(&names(inputs));
        s.push(' ');
    }
    s.push_str("->");
    if !outputs.is_empty() {
        s.push(' ');
        s.push_str(&names(outputs));
    }
    s
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Seq(parts) => parts.iter().map(print_expr).collect::<Vec<_>>().join(" ; "),
        ExprKind::Par(parts) => parts.iter().map(print_expr).collect::<Vec<_>>().join(" * "),
        ExprKind::Name(n) => n.clone(),
        ExprKind::Id(a) => format!("id({})", a.text),
        ExprKind::Swap(a, b) => format!("swap({}, {})", a.text, b.text),
        ExprKind::Discard(a) => format!("discard({})", a.text),
        ExprKind::Uniform(a) => format!("uniform({})", a.text),
        ExprKind::Paren(inner) => format!("({})", print_expr(inner)),
    }
}

fn kind(d: &Decl) -> u8 {
    match d {
        Decl::System { .. } => 0,
        Decl::Stoch { .. } | Decl::Chan { .. } => 1,
        Decl::Diag { .. } => 2,
        Decl::Poset { .. } => 3,
        Decl::Network { .. } => 4,
        Decl::Check { .. } => 5,
    }
}

fn print_decl(out: &mut String, d: &Decl) {
    match d {
        Decl::System { name, dim, sort } => {
            let _ = write!(out, "system {} dim {dim}", name.text);
            match sort {
                Some(Sort::Normal) => out.push_str(" sort normal"),
                Some(Sort::Exotic) => out.push_str(" sort exotic"),
                None => {}
            }
            out.push_str(";\n");
        }
        Decl::Stoch {
            name,
            inputs,
            outputs,
            rows,
        } => {
            let _ = writeln!(
                out,
                "stoch {} : {} {};",
                name.text,
                arrow(inputs, outputs),
                matrix(rows, |x| real(*x))
            );
        }
        Decl::Chan {
            name,
            inputs,
            outputs,
            rows,
        } => {
            let _ = writeln!(
                out,
                "chan {} : {} choi {};",
                name.text,
                arrow(inputs, outputs),
                matrix(rows, |z| complex(*z))
            );
        }
        Decl::Diag { name, expr } => {
            let _ = writeln!(out, "diag {} = {};", name.text, print_expr(expr));
        }
        Decl::Poset { name, elements, edges } => {
            let _ = writeln!(out, "poset {} {{", name.text);
            for e in elements {
                let _ = writeln!(out, "  {};", e.text);
            }
            for (lo, hi) in edges {
                let _ = writeln!(out, "  {} < {};", lo.text, hi.text);
            }
            out.push_str("}\n");
        }
        Decl::Network {
            name,
            poset,
            nodes,
            wires,
        } => {
            let _ = writeln!(out, "network {} on {} {{", name.text, poset.text);
            for (n, e) in nodes {
                let _ = writeln!(out, "  node {} = {};", n.text, print_expr(e));
            }
            for (from, to) in wires {
                let dir = |p: &super::ast::PortName| if p.output { "out" } else { "in" };
                let _ = writeln!(
                    out,
                    "  wire {}.{}{} -> {}.{}{};",
                    from.node.text,
                    dir(from),
                    from.port,
                    to.node.text,
                    dir(to),
                    to.port
                );
            }
            out.push_str("}\n");
        }
        Decl::Check { kind, target } => match target {
            Some(t) => {
                let _ = writeln!(out, "check {} {};", kind.text, t.text);
            }
            None => {
                let _ = writeln!(out, "check {};", kind.text);
            }
        },
    }
}

/// Canonical text: one declaration per line, blocks indented by two
/// spaces, a blank line between groups of different declaration kinds.
pub fn print_source(src: &SourceFile) -> String {
    let mut out = String::new();
    let mut prev: Option<u8> = None;
    for d in &src.decls {
        let k = kind(d);
        let block = matches!(d, Decl::Poset { .. } | Decl::Network { .. });
        if prev.is_some_and(|p| p != k || block) {
            out.push('\n');
        }
        print_decl(&mut out, d);
        prev = Some(k);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_source;

    #[test]
    fn reals_round_trip_bit_exactly() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004, -0.0] {
            let s = real(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn complex_forms() {
        assert_eq!(complex(Complex64::new(0.5, 0.0)), "0.5");
        assert_eq!(complex(Complex64::new(0.5, -0.25)), "0.5-0.25i");
        assert_eq!(complex(Complex64::new(0.0, 1.0)), "0.0+1.0i");
    }

    #[test]
    fn canonical_layout() {
        let src = parse_source(
            "system A dim 2; stoch s : -> A (.25|.75); poset P { b < c; a < b; } check terminal s;",
        )
        .unwrap();
        assert_eq!(
            print_source(&src),
            "system A dim 2;\n\nstoch s : -> A (0.25 | 0.75);\n\nposet P {\n  b;\n  c;\n  a;\n  a < b;\n  b < c;\n}\n\ncheck terminal s;\n"
        );
    }

    #[test]
    fn reparse_is_identity() {
        let text = "system A dim 2 sort exotic; chan u : A -> A choi (1 0 0 1-0.0i | 0 0 0 0 | 0 0 0 0 | 1 0 0 1); diag d = (u * id(A)) ; swap(A, A) ; discard(A) * uniform(A);";
        let a = parse_source(text).unwrap();
        let b = parse_source(&print_source(&a)).unwrap();
        assert_eq!(a, b);
    }
}
