//! Plain-text behaviour files.
//!
//! ```text
//! behavior 2 2 2 2
//! # x y a b p
//! 0 0 0 0 0.5
//! 0 0 1 1 0.5
//! ```
//!
//! Cells not listed are 0. `#` starts a comment.

use super::{Behavior, BehaviorError};

pub fn parse_behavior(text: &str, tol: f64) -> Result<Behavior, BehaviorError> {
    let err = |line: usize, msg: String| BehaviorError::Parse { line, msg };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((hline, header)) = lines.next() else {
        return Err(err(1, "missing `behavior` header".into()));
    };
    let mut words = header.split_whitespace();
    if words.next() != Some("behavior") {
        return Err(err(hline, "expected `behavior |A| |B| |X| |Y|`".into()));
    }
    let sizes: Vec<usize> = words
        .map(|w| w.parse().map_err(|_| err(hline, format!("bad alphabet size `{w}`"))))
        .collect::<Result<_, _>>()?;
    let sizes: [usize; 4] = sizes
        .try_into()
        .map_err(|_| err(hline, "expected four alphabet sizes".into()))?;
    if sizes.iter().any(|&s| s == 0 || s > super::MAX_ALPHABET) {
        return Err(BehaviorError::Alphabet(sizes));
    }
    let [na, nb, nx, ny] = sizes;
    let mut table = vec![0.0; na * nb * nx * ny];
    let mut seen = vec![false; table.len()];
    for (n, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(err(n, format!("expected `x y a b p`, found {} fields", f.len())));
        }
        let mut idx = [0usize; 4];
        for (k, (w, bound)) in f[..4].iter().zip([nx, ny, na, nb]).enumerate() {
            idx[k] = w.parse().map_err(|_| err(n, format!("bad index `{w}`")))?;
            if idx[k] >= bound {
                return Err(err(n, format!("index {} out of range 0..{bound}", idx[k])));
            }
        }
        let p: f64 = f[4].parse().map_err(|_| err(n, format!("bad probability `{}`", f[4])))?;
        if !p.is_finite() {
            return Err(err(n, format!("bad probability `{}`", f[4])));
        }
        let [x, y, a, b] = idx;
        let cell = ((x * ny + y) * na + a) * nb + b;
        if std::mem::replace(&mut seen[cell], true) {
            return Err(err(n, format!("cell x={x} y={y} a={a} b={b} given twice")));
        }
        table[cell] = p;
    }
    Behavior::new(sizes, table, tol)
}

/// Canonical text form listing the nonzero cells.
pub fn write_behavior(beh: &Behavior) -> String {
    let [na, nb, nx, ny] = beh.sizes();
    let mut out = format!("behavior {na} {nb} {nx} {ny}\n");
    for x in 0..nx {
        for y in 0..ny {
            for a in 0..na {
                for b in 0..nb {
                    let p = beh.p(a, b, x, y);
                    if p != 0.0 {
                        out.push_str(&format!("{x} {y} {a} {b} {p}\n"));
                    }
                }
            }
        }
    }
    out
}
