use std::path::{Path, PathBuf};

use causalkit::dsl::{self, ParseError};
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "proc"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

/// 1-based line and column of a byte offset, counted in characters.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().unwrap().chars().count() + 1;
    (line, column)
}

/// An error offset lies between tokens: for a parse error it is where a
/// token of the input starts or ends (or the end of input); for a lexical
/// error everything before it lexes cleanly. Line and column must agree.
fn check_position(text: &str, e: &ParseError) -> Result<(), String> {
    if e.offset > text.len() || !text.is_char_boundary(e.offset) {
        return Err(format!("offset {} outside the input", e.offset));
    }
    if position(text, e.offset) != (e.line, e.column) {
        return Err(format!("{}:{} does not match offset {}", e.line, e.column, e.offset));
    }
    let on_boundary = match dsl::lex(text) {
        Ok(tokens) => {
            e.offset == text.len()
                || tokens.iter().any(|t| t.span.offset == e.offset || t.span.offset + t.text.len() == e.offset)
        }
        Err(_) => dsl::lex(&text[..e.offset]).is_ok(),
    };
    if on_boundary {
        Ok(())
    } else {
        Err(format!("offset {} is inside a token", e.offset))
    }
}

#[test]
fn corpus_round_trips() {
    let mut parsed = 0;
    for (name, text) in corpus() {
        let Ok(src) = dsl::parse_source(&text) else { continue };
        let printed = dsl::print_source(&src);
        let again = dsl::parse_source(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(again, src, "{name}");
        assert_eq!(dsl::print_source(&again), printed, "{name}");
        if let Ok(doc) = dsl::parse(&text) {
            let redo = dsl::parse(&printed).unwrap();
            assert_eq!(redo.interpretation(), doc.interpretation(), "{name}");
            assert_eq!(doc.print(), printed, "{name}");
        }
        parsed += 1;
    }
    assert!(parsed >= 20, "only {parsed} fixtures parse");
}

#[test]
fn diamond_prints_as_the_golden_file() {
    let text = std::fs::read_to_string(fixtures().join("diamond.proc")).unwrap();
    let golden = std::fs::read_to_string(fixtures().join("golden/diamond.proc")).unwrap();
    assert_eq!(dsl::print_source(&dsl::parse_source(&text).unwrap()), golden);
}

#[test]
fn parsing_is_deterministic() {
    for (name, text) in corpus() {
        let (a, b) = (dsl::parse(&text), dsl::parse(&text));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.source, b.source, "{name}");
                assert_eq!(a.interpretation(), b.interpretation(), "{name}");
            }
            (Err(a), Err(b)) => assert_eq!(a, b, "{name}"),
            _ => panic!("{name}: outcomes differ"),
        }
    }
}

#[test]
fn truncated_fixtures_fail_cleanly() {
    let mut errors = 0;
    for (name, full) in corpus() {
        if dsl::parse(&full).is_err() {
            continue;
        }
        for cut in (0..full.len()).filter(|&i| full.is_char_boundary(i)) {
            let text = &full[..cut];
            if let Err(e) = dsl::parse(text) {
                check_position(text, &e).unwrap_or_else(|m| panic!("{name} cut at {cut}: {m}: {e}"));
                errors += 1;
            }
        }
    }
    assert!(errors > 1000);
}

fn token_soup() -> impl Strategy<Value = String> {
    let piece = prop::sample::select(vec![
        "system", "stoch", "chan", "diag", "poset", "network", "node", "wire", "check", "on", "dim", "sort",
        "choi", "id", "swap", "discard", "uniform", "A", "B", "f", "0.5", "1", "-2e3", "1+2i", ";", ":", "->", "*",
        "(", ")", "|", "{", "}", "<", "=", ",", ".", "out0", "in1", " ", "\n", "#c\n", "@", "é",
    ]);
    prop::collection::vec(piece, 0..40).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn arbitrary_input_never_panics(text in token_soup()) {
        if let Err(e) = dsl::parse(&text) {
            if let Err(m) = check_position(&text, &e) {
                prop_assert!(false, "{}: {}", m, e);
            }
        }
    }
}
