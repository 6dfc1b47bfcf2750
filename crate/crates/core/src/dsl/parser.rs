use num_complex::Complex64;

use super::ast::{Decl, Expr, ExprKind, Name, PortName, SourceFile};
use super::lexer::{lex, Tok, Token};
use super::{ParseError, Span};
use crate::diagram::Sort;

/// Words that start declarations or network items; never usable as names.
pub const KEYWORDS: [&str; 9] = ["system", "stoch", "chan", "diag", "poset", "network", "check", "node", "wire"];

/// Reserved atom heads that take a parenthesised argument.
const ATOMS: [&str; 4] = ["id", "swap", "discard", "uniform"];

fn reserved(s: &str) -> bool {
    KEYWORDS.contains(&s) || ATOMS.contains(&s)
}

pub fn parse_source(src: &str) -> Result<SourceFile, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(SourceFile { decls })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let found = self.peek().describe();
        let expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        Err(ParseError::new(
            self.span(),
            format!("expected {}, found {found}", expected.join(" or ")),
            expected,
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().span)
        } else {
            self.fail(&[&format!("`{}`", tok.symbol())])
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn keyword(&mut self, w: &str) -> Result<Span, ParseError> {
        if self.is_word(w) {
            Ok(self.advance().span)
        } else {
            self.fail(&[&format!("`{w}`")])
        }
    }

    fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !reserved(s) => {
                let t = self.advance();
                Ok(Name {
                    text: t.text,
                    span: t.span,
                })
            }
            _ => self.fail(&["name"]),
        }
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.fail(&["declaration"]),
        };
        match word.as_str() {
            "system" => self.system(),
            "stoch" | "chan" => self.binding(word == "chan"),
            "diag" => {
                self.advance();
                let name = self.name()?;
                self.expect(Tok::Equals)?;
                let expr = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Decl::Diag { name, expr })
            }
            "poset" => self.poset(),
            "network" => self.network(),
            "check" => {
                self.advance();
                let kind = self.name()?;
                let target = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.name()?)
                };
                self.expect(Tok::Semi)?;
                Ok(Decl::Check { kind, target })
            }
            _ => self.fail(&["`system`", "`stoch`", "`chan`", "`diag`", "`poset`", "`network`", "`check`"]),
        }
    }

    fn integer(&mut self) -> Result<usize, ParseError> {
        let t = &self.tokens[self.pos];
        if matches!(t.tok, Tok::Number(_)) && t.text.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = t.text.parse() {
                self.advance();
                return Ok(n);
            }
        }
        self.fail(&["integer"])
    }

    fn system(&mut self) -> Result<Decl, ParseError> {
        self.advance();
        let name = self.name()?;
        self.keyword("dim")?;
        let dim = self.integer()?;
        let sort = if self.is_word("sort") {
            self.advance();
            if self.is_word("normal") {
                self.advance();
                Some(Sort::Normal)
            } else if self.is_word("exotic") {
                self.advance();
                Some(Sort::Exotic)
            } else {
                return self.fail(&["`normal`", "`exotic`"]);
            }
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(Decl::System { name, dim, sort })
    }

    fn typelist(&mut self) -> Result<Vec<Name>, ParseError> {
        let mut out = Vec::new();
        if !matches!(self.peek(), Tok::Ident(s) if !reserved(s) && s != "choi") {
            return Ok(out);
        }
        out.push(self.name()?);
        while *self.peek() == Tok::Comma {
            self.advance();
            out.push(self.name()?);
        }
        Ok(out)
    }

    fn binding(&mut self, quantum: bool) -> Result<Decl, ParseError> {
        self.advance();
        let name = self.name()?;
        self.expect(Tok::Colon)?;
        let inputs = self.typelist()?;
        self.expect(Tok::Arrow)?;
        let outputs = self.typelist()?;
        let decl = if quantum {
            self.keyword("choi")?;
            let rows = self.matrix(|t| match t {
                Tok::Number(x) => Some(Complex64::new(*x, 0.0)),
                Tok::Complex(z) => Some(*z),
                _ => None,
            })?;
            Decl::Chan {
                name,
                inputs,
                outputs,
                rows,
            }
        } else {
            let rows = self.matrix(|t| match t {
                Tok::Number(x) => Some(*x),
                _ => None,
            })?;
            Decl::Stoch {
                name,
                inputs,
                outputs,
                rows,
            }
        };
        self.expect(Tok::Semi)?;
        Ok(decl)
    }

    fn matrix<T>(&mut self, entry: impl Fn(&Tok) -> Option<T>) -> Result<Vec<Vec<T>>, ParseError> {
        let start = self.expect(Tok::LParen)?;
        let mut rows = vec![Vec::new()];
        loop {
            if let Some(v) = entry(self.peek()) {
                self.advance();
                rows.last_mut().expect("at least one row").push(v);
                continue;
            }
            match self.peek() {
                Tok::Bar if !rows.last().expect("row").is_empty() => {
                    self.advance();
                    rows.push(Vec::new());
                }
                Tok::RParen if !rows.last().expect("row").is_empty() => {
                    self.advance();
                    break;
                }
                _ if rows.last().expect("row").is_empty() => return self.fail(&["number"]),
                _ => return self.fail(&["number", "`|`", "`)`"]),
            }
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(ParseError::new(start, "matrix rows have different lengths".into(), vec![]));
        }
        Ok(rows)
    }

    fn poset(&mut self) -> Result<Decl, ParseError> {
        self.advance();
        let name = self.name()?;
        self.expect(Tok::LBrace)?;
        let mut elements: Vec<Name> = Vec::new();
        let mut edges: Vec<(Name, Name)> = Vec::new();
        let add = |n: &Name, elements: &mut Vec<Name>| {
            if !elements.iter().any(|e| e.text == n.text) {
                elements.push(n.clone());
            }
        };
        while *self.peek() != Tok::RBrace {
            let lo = self.name()?;
            add(&lo, &mut elements);
            if *self.peek() == Tok::Less {
                self.advance();
                let hi = self.name()?;
                add(&hi, &mut elements);
                edges.push((lo, hi));
            }
            self.expect(Tok::Semi)?;
        }
        self.advance();
        edges.sort_by(|x, y| (&x.0.text, &x.1.text).cmp(&(&y.0.text, &y.1.text)));
        edges.dedup_by(|x, y| x.0.text == y.0.text && x.1.text == y.1.text);
        Ok(Decl::Poset { name, elements, edges })
    }

    fn port(&mut self) -> Result<PortName, ParseError> {
        let node = self.name()?;
        self.expect(Tok::Dot)?;
        let t = &self.tokens[self.pos];
        if let Tok::Ident(s) = &t.tok {
            let (output, digits) = if let Some(d) = s.strip_prefix("out") {
                (true, d)
            } else if let Some(d) = s.strip_prefix("in") {
                (false, d)
            } else {
                return self.fail(&["`outN`", "`inN`"]);
            };
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(port) = digits.parse() {
                    self.advance();
                    return Ok(PortName { node, output, port });
                }
            }
        }
        self.fail(&["`outN`", "`inN`"])
    }

    fn network(&mut self) -> Result<Decl, ParseError> {
        self.advance();
        let name = self.name()?;
        self.keyword("on")?;
        let poset = self.name()?;
        self.expect(Tok::LBrace)?;
        let mut nodes = Vec::new();
        let mut wires = Vec::new();
        loop {
            if self.is_word("node") && wires.is_empty() {
                self.advance();
                let n = self.name()?;
                self.expect(Tok::Equals)?;
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                nodes.push((n, e));
            } else if self.is_word("wire") {
                self.advance();
                let from = self.port()?;
                self.expect(Tok::Arrow)?;
                let to = self.port()?;
                self.expect(Tok::Semi)?;
                wires.push((from, to));
            } else if *self.peek() == Tok::RBrace {
                self.advance();
                break;
            } else if wires.is_empty() {
                return self.fail(&["`node`", "`wire`", "`}`"]);
            } else {
                return self.fail(&["`wire`", "`}`"]);
            }
        }
        Ok(Decl::Network {
            name,
            poset,
            nodes,
            wires,
        })
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => ATOMS.contains(&s.as_str()) || !reserved(s),
            _ => false,
        }
    }

    /// `term (";" term)*`; a `;` not followed by an atom ends the expression
    /// and is left for the caller.
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut parts = vec![self.term()?];
        while *self.peek() == Tok::Semi {
            let save = self.pos;
            self.advance();
            if !self.starts_atom() {
                self.pos = save;
                break;
            }
            parts.push(self.term()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Expr {
                kind: ExprKind::Seq(parts),
                span,
            }
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let mut parts = vec![self.atom()?];
        while *self.peek() == Tok::Star {
            self.advance();
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Expr {
                kind: ExprKind::Par(parts),
                span,
            }
        })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                ExprKind::Paren(Box::new(inner))
            }
            Tok::Ident(s) if ATOMS.contains(&s.as_str()) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let a = self.name()?;
                let kind = match s.as_str() {
                    "id" => ExprKind::Id(a),
                    "discard" => ExprKind::Discard(a),
                    "uniform" => ExprKind::Uniform(a),
                    _ => {
                        self.expect(Tok::Comma)?;
                        ExprKind::Swap(a, self.name()?)
                    }
                };
                self.expect(Tok::RParen)?;
                kind
            }
            Tok::Ident(s) if !reserved(&s) => {
                self.advance();
                ExprKind::Name(s)
            }
            _ => return self.fail(&["name", "`id`", "`swap`", "`discard`", "`uniform`", "`(`"]),
        };
        Ok(Expr { kind, span })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_binds_looser_than_par() {
        let f = parse_source("diag d = f * g ; h;").unwrap();
        let Decl::Diag { expr, .. } = &f.decls[0] else { panic!() };
        let ExprKind::Seq(parts) = &expr.kind else { panic!("{expr:?}") };
        assert!(matches!(parts[0].kind, ExprKind::Par(_)));
        assert!(matches!(&parts[1].kind, ExprKind::Name(n) if n == "h"));
    }

    #[test]
    fn trailing_semicolon_ends_expression() {
        let f = parse_source("diag d = f ; discard(A);\nsystem A dim 2;").unwrap();
        assert_eq!(f.decls.len(), 2);
    }

    #[test]
    fn matrices_and_typelists() {
        let f = parse_source("stoch s : -> A, B (0.25 | 0.75 | 0 | 0);").unwrap();
        let Decl::Stoch { inputs, outputs, rows, .. } = &f.decls[0] else { panic!() };
        assert!(inputs.is_empty());
        assert_eq!(outputs.len(), 2);
        assert_eq!(rows, &vec![vec![0.25], vec![0.75], vec![0.0], vec![0.0]]);
        let e = parse_source("stoch s : A -> A (1 0 | 1);").unwrap_err();
        assert!(e.message.contains("different lengths"));
    }

    #[test]
    fn errors_report_expected_tokens() {
        let e = parse_source("system A dim two;").unwrap_err();
        assert_eq!((e.line, e.column), (1, 14));
        assert_eq!(e.expected, vec!["integer".to_string()]);
        let e = parse_source("diag d = ;").unwrap_err();
        assert_eq!(e.column, 10);
    }

    #[test]
    fn posets_sort_edges() {
        let f = parse_source("poset P { top; b < top; a < top; bot < b; bot < a; }").unwrap();
        let Decl::Poset { elements, edges, .. } = &f.decls[0] else { panic!() };
        let names: Vec<&str> = elements.iter().map(|e| e.text.as_str()).collect();
        assert_eq!(names, ["top", "b", "a", "bot"]);
        let pairs: Vec<(&str, &str)> = edges.iter().map(|(x, y)| (x.text.as_str(), y.text.as_str())).collect();
        assert_eq!(pairs, [("a", "top"), ("b", "top"), ("bot", "a"), ("bot", "b")]);
    }

    #[test]
    fn network_ports() {
        let f = parse_source("network N on P { node a = f; node b = g ; h; wire a.out0 -> b.in1; }").unwrap();
        let Decl::Network { nodes, wires, .. } = &f.decls[0] else { panic!() };
        assert_eq!(nodes.len(), 2);
        assert!(matches!(nodes[1].1.kind, ExprKind::Seq(_)));
        assert_eq!(wires[0].1.port, 1);
        assert!(!wires[0].1.output);
        assert!(parse_source("network N on P { wire a.left -> b.in0; }").is_err());
    }
}
