use num_complex::Complex64;

use super::{ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    /// Literal with an imaginary part, `a+bi` or `bi`.
    Complex(Complex64),
    Semi,
    Colon,
    Comma,
    Arrow,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bar,
    Star,
    Less,
    Equals,
    Dot,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x:?}"),
            Tok::Complex(z) => format!("number {z}"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.symbol()),
        }
    }

    pub fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Arrow => "->",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Bar => "|",
            Tok::Star => "*",
            Tok::Less => "<",
            Tok::Equals => "=",
            Tok::Dot => ".",
            _ => "",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    /// Source spelling, used for integer checks.
    pub text: String,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(k)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else if c != '\r' {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            offset: self.pos,
            line: self.line,
            column: self.col,
        }
    }
}

/// Length in bytes of an unsigned decimal literal at the start of `s`.
fn unsigned_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > start
    };
    let whole = digits(&mut i);
    let mut frac = false;
    if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
        i += 1;
        frac = digits(&mut i);
    }
    if !whole && !frac {
        return 0;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > start {
            i = j;
        }
    }
    i
}

fn signed_len(s: &str) -> usize {
    let sign = usize::from(s.starts_with(['+', '-']));
    match unsigned_len(&s[sign..]) {
        0 => 0,
        n => sign + n,
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn imag_suffix(s: &str, at: usize) -> bool {
    s[at..].starts_with('i') && !s[at + 1..].chars().next().is_some_and(is_ident_char)
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut c = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        while let Some(ch) = c.peek() {
            if ch.is_whitespace() {
                c.bump();
            } else if ch == '#' {
                while c.peek().is_some_and(|ch| ch != '\n') {
                    c.bump();
                }
            } else {
                break;
            }
        }
        let span = c.span();
        let Some(ch) = c.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                text: String::new(),
                span,
            });
            return Ok(out);
        };
        let rest = &src[c.pos..];
        let simple = match ch {
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '|' => Some(Tok::Bar),
            '*' => Some(Tok::Star),
            '<' => Some(Tok::Less),
            '=' => Some(Tok::Equals),
            '.' if !c.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => Some(Tok::Dot),
            '-' if c.peek_at(1) == Some('>') => {
                c.bump();
                Some(Tok::Arrow)
            }
            _ => None,
        };
        if let Some(tok) = simple {
            c.bump();
            out.push(Token {
                text: src[span.offset..c.pos].to_string(),
                tok,
                span,
            });
            continue;
        }
        let n = signed_len(rest);
        if n > 0 {
            let first: f64 = rest[..n].parse().map_err(|_| lex_error(span, rest))?;
            let (tok, len) = if imag_suffix(rest, n) {
                (Tok::Complex(Complex64::new(0.0, first)), n + 1)
            } else if rest[n..].starts_with(['+', '-']) {
                let m = signed_len(&rest[n..]);
                if m > 1 && imag_suffix(rest, n + m) {
                    let im: f64 = rest[n..n + m].parse().map_err(|_| lex_error(span, rest))?;
                    (Tok::Complex(Complex64::new(first, im)), n + m + 1)
                } else {
                    (Tok::Number(first), n)
                }
            } else {
                (Tok::Number(first), n)
            };
            if rest[len..].chars().next().is_some_and(is_ident_char) {
                return Err(lex_error(span, rest));
            }
            let end = c.pos + len;
            while c.pos < end {
                c.bump();
            }
            if !tok_finite(&tok) {
                return Err(ParseError::new(span, format!("number `{}` is out of range", &rest[..len]), vec![]));
            }
            out.push(Token {
                tok,
                text: rest[..len].to_string(),
                span,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            while c.peek().is_some_and(is_ident_char) {
                c.bump();
            }
            let text = src[span.offset..c.pos].to_string();
            out.push(Token {
                tok: Tok::Ident(text.clone()),
                text,
                span,
            });
            continue;
        }
        return Err(lex_error(span, rest));
    }
}

fn tok_finite(t: &Tok) -> bool {
    match t {
        Tok::Number(x) => x.is_finite(),
        Tok::Complex(z) => z.re.is_finite() && z.im.is_finite(),
        _ => true,
    }
}

fn lex_error(span: Span, rest: &str) -> ParseError {
    let word: String = rest
        .chars()
        .take_while(|c| !c.is_whitespace())
        .take(16)
        .collect();
    ParseError::new(span, format!("unexpected character sequence `{word}`"), vec![])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_complex() {
        assert_eq!(
            toks(".5 -0.25 1e-3 2i 0.5-0.5i 1-2"),
            vec![
                Tok::Number(0.5),
                Tok::Number(-0.25),
                Tok::Number(1e-3),
                Tok::Complex(Complex64::new(0.0, 2.0)),
                Tok::Complex(Complex64::new(0.5, -0.5)),
                Tok::Number(1.0),
                Tok::Number(-2.0),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn arrows_dots_and_idents() {
        assert_eq!(
            toks("f : A -> B; bot.out0"),
            vec![
                Tok::Ident("f".into()),
                Tok::Colon,
                Tok::Ident("A".into()),
                Tok::Arrow,
                Tok::Ident("B".into()),
                Tok::Semi,
                Tok::Ident("bot".into()),
                Tok::Dot,
                Tok::Ident("out0".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based_and_crlf_safe() {
        let t = lex("system A\r\n  dim 2;").unwrap();
        assert_eq!((t[0].span.line, t[0].span.column), (1, 1));
        assert_eq!((t[2].span.line, t[2].span.column), (2, 3));
        assert_eq!(t[2].span.offset, 12);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("# note\nA # tail"), vec![Tok::Ident("A".into()), Tok::Eof]);
    }

    #[test]
    fn stray_characters_error() {
        let e = lex("A $").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(lex("2x").is_err());
    }
}
