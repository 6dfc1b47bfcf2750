//! Command-line front end over `.proc` and `.behavior` files.
//!
//! Every subcommand produces a [`CommandResult`]; its `exit_code` is 0 for a
//! passing verdict, 1 for a failing one and 2 for usage or input errors.

use std::fmt::Write as _;
use std::path::PathBuf;

use causalkit::behavior::{
    behavior_nonsignalling, lhv_feasible, parse_behavior, Behavior, DEFAULT_VERTEX_CAP,
};
use causalkit::causal::diamond_normal_form;
use causalkit::checkers::{
    check_bang, check_nonsignalling, check_terminal_process, check_terminal_theory, theorem1_witness,
    theorem2_audit, BangMethod, CheckError, Split, DEFAULT_MAX_SIZE,
};
use causalkit::diagram::Diagram;
use causalkit::dsl::{self, Document};
use causalkit::semantics::{
    evaluate, random_generator, Backend, Binding, ConcreteMap, MapClass, MapMatrix, MapViolation,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const TOL_ENV: &str = "CAUSALKIT_TOL";

#[derive(Debug, Parser)]
#[command(name = "causalkit", version, about = "Terminality, non-signalling and LHV checks on process diagrams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Repr {
    /// Composable transfer matrix.
    #[default]
    Transfer,
    /// Choi matrix on output ⊗ input.
    Choi,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input file (`.proc` or `.behavior`).
    #[arg(long)]
    pub file: PathBuf,
    /// Tolerance; defaults to $CAUSALKIT_TOL, then to the backend default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Replace every box binding with a seeded random map of its shape.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Matrix form for quantum witnesses.
    #[arg(long, value_enum, default_value_t)]
    pub repr: Repr,
}

#[derive(Debug, Clone, Args)]
pub struct Parties {
    /// Poset elements forming party A (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub party_a: Vec<String>,
    /// Poset elements forming party B (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub party_b: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Parse a file and validate every box binding.
    Parse(Common),
    /// Evaluate a diagram, box or network.
    Eval {
        #[command(flatten)]
        common: Common,
        name: String,
    },
    /// Terminality of one diagram, or of every declared box.
    CheckTerminal {
        #[command(flatten)]
        common: Common,
        name: Option<String>,
    },
    /// Non-signalling of a bipartite process.
    CheckNonsig {
        #[command(flatten)]
        common: Common,
        name: String,
        /// Input ports belonging to party A.
        #[arg(long, value_delimiter = ',')]
        a_in: Option<Vec<usize>>,
        /// Output ports belonging to party A.
        #[arg(long, value_delimiter = ',')]
        a_out: Option<Vec<usize>>,
        #[command(flatten)]
        parties: Parties,
    },
    /// Build and verify the witnesses h, h' for a diamond-shaped network.
    DiamondWitness {
        #[command(flatten)]
        common: Common,
        name: String,
        #[command(flatten)]
        parties: Parties,
    },
    /// Check that every closed diagram evaluates to 1.
    Bang {
        #[command(flatten)]
        common: Common,
        /// Enumerate closed diagrams instead of checking generators.
        #[arg(long)]
        enumerate: bool,
        /// Generator count bound for the enumeration.
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Relate (!), non-signalling embeddings and terminality for a theory.
    AuditTheorem2(Common),
    /// Decide whether a behaviour has a local hidden variable model.
    Lhv {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        vertex_cap: u64,
    },
    /// Non-signalling of a behaviour table.
    BehaviorNs(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Parse(_) => "parse",
            Command::Eval { .. } => "eval",
            Command::CheckTerminal { .. } => "check-terminal",
            Command::CheckNonsig { .. } => "check-nonsig",
            Command::DiamondWitness { .. } => "diamond-witness",
            Command::Bang { .. } => "bang",
            Command::AuditTheorem2(_) => "audit-theorem2",
            Command::Lhv { .. } => "lhv",
            Command::BehaviorNs(_) => "behavior-ns",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Parse(c) | Command::AuditTheorem2(c) | Command::BehaviorNs(c) => c,
            Command::Eval { common, .. }
            | Command::CheckTerminal { common, .. }
            | Command::CheckNonsig { common, .. }
            | Command::DiamondWitness { common, .. }
            | Command::Bang { common, .. }
            | Command::Lhv { common, .. } => common,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Verdict {
    Bool(bool),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum WitnessData {
    Real(Vec<f64>),
    /// `[re, im]` pairs.
    Complex(Vec<[f64; 2]>),
}

/// A matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub rows: usize,
    pub cols: usize,
    /// `real`, `transfer` or `choi`.
    pub repr: &'static str,
    pub data: WitnessData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandResult {
    pub command: String,
    pub verdict: Verdict,
    pub residual: f64,
    pub witness: Option<Witness>,
    pub diagnostics: Vec<String>,
    pub exit_code: i32,
}

impl CommandResult {
    fn verdict(command: &str, pass: bool, residual: f64) -> Self {
        CommandResult {
            command: command.to_string(),
            verdict: Verdict::Bool(pass),
            residual: finite(residual),
            witness: None,
            diagnostics: Vec::new(),
            exit_code: if pass { 0 } else { 1 },
        }
    }

    fn error(command: &str, message: String) -> Self {
        CommandResult {
            command: command.to_string(),
            verdict: Verdict::Bool(false),
            residual: 0.0,
            witness: None,
            diagnostics: vec![message],
            exit_code: 2,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("command results serialize")
    }

    /// Human-readable form; residuals in scientific notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let status = match self.exit_code {
            0 => "PASS",
            1 => "FAIL",
            _ => "ERROR",
        };
        let _ = writeln!(out, "{}: {status}", self.command);
        match &self.verdict {
            Verdict::Bool(b) => {
                let _ = writeln!(out, "verdict: {b}");
            }
            Verdict::Value(v) => {
                let _ = writeln!(out, "verdict: {v}");
            }
        }
        let _ = writeln!(out, "residual: {:.2e}", self.residual);
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness ({}, {}x{}):", w.repr, w.rows, w.cols);
            for r in 0..w.rows {
                let cells: Vec<String> = (0..w.cols)
                    .map(|c| match &w.data {
                        WitnessData::Real(d) => format!("{:>9.6}", d[r * w.cols + c]),
                        WitnessData::Complex(d) => {
                            let [re, im] = d[r * w.cols + c];
                            format!("{re:>9.6}{im:+.6}i")
                        }
                    })
                    .collect();
                let _ = writeln!(out, "  {}", cells.join(" "));
            }
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "- {d}");
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json() + "\n",
            Format::Text => self.to_text(),
        }
    }
}

/// JSON has no infinities; clamp them so output stays valid.
fn finite(x: f64) -> f64 {
    if x.is_nan() {
        f64::MAX
    } else {
        x.clamp(-f64::MAX, f64::MAX)
    }
}

fn witness(map: &ConcreteMap, repr: Repr) -> Witness {
    match map.matrix() {
        MapMatrix::Real(m) => Witness {
            rows: m.nrows(),
            cols: m.ncols(),
            repr: "real",
            data: WitnessData::Real(m.transpose().iter().copied().collect()),
        },
        MapMatrix::Complex(t) => {
            let (m, repr) = match repr {
                Repr::Transfer => (t.clone(), "transfer"),
                Repr::Choi => (map.to_choi().expect("quantum maps have a Choi matrix"), "choi"),
            };
            Witness {
                rows: m.nrows(),
                cols: m.ncols(),
                repr,
                data: WitnessData::Complex(m.transpose().iter().map(|z| [z.re, z.im]).collect()),
            }
        }
    }
}

fn table_witness(rows: usize, cols: usize, data: Vec<f64>) -> Witness {
    Witness {
        rows,
        cols,
        repr: "real",
        data: WitnessData::Real(data),
    }
}

/// Parse `argv` (including the program name) and run the command.
pub fn run<I, T>(argv: I) -> Result<CommandResult, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    Ok(execute(&cli.command))
}

/// Failures that end a command with exit code 2.
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

pub fn execute(cmd: &Command) -> CommandResult {
    let name = cmd.name();
    match dispatch(cmd) {
        Ok(r) => r,
        Err(Fail(msg)) => CommandResult::error(name, msg),
    }
}

fn env_tol() -> Result<Option<f64>, Fail> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Fail(format!("{TOL_ENV}=`{s}` is not a number"))),
        Err(_) => Ok(None),
    }
}

fn tolerance(common: &Common, default: f64) -> Result<f64, Fail> {
    let tol = match common.tol {
        Some(t) => t,
        None => env_tol()?.unwrap_or(default),
    };
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Fail(format!("tolerance {tol} must be finite and non-negative")));
    }
    Ok(tol)
}

fn read(common: &Common) -> Result<String, Fail> {
    std::fs::read_to_string(&common.file).map_err(|e| Fail(format!("{}: {e}", common.file.display())))
}

fn load_document(common: &Common) -> Result<(Document, f64), Fail> {
    let text = read(common)?;
    let mut doc = dsl::parse(&text).map_err(|e| Fail(format!("{}:{e}", common.file.display())))?;
    if let Some(seed) = common.seed {
        reseed(&mut doc, seed)?;
    }
    let tol = tolerance(common, doc.backend().default_tol())?;
    Ok((doc, tol))
}

fn load_behavior(common: &Common) -> Result<(Behavior, f64), Fail> {
    let text = read(common)?;
    let tol = tolerance(common, Backend::FinStoch.default_tol())?;
    let beh = parse_behavior(&text, tol).map_err(|e| Fail(format!("{}: {e}", common.file.display())))?;
    Ok((beh, tol))
}

/// Rebind the i-th declared box to a random normalised map seeded with
/// `seed + i`.
fn reseed(doc: &mut Document, seed: u64) -> Result<(), Fail> {
    let backend = doc.backend();
    let class = match backend {
        Backend::FinStoch => MapClass::Stochastic,
        Backend::Quantum => MapClass::Cptp,
    };
    for (i, g) in doc.generators().iter().enumerate() {
        let interp = doc.interpretation_mut();
        let ins = interp.dims_of(g.inputs())?;
        let outs = interp.dims_of(g.outputs())?;
        let b = random_generator(backend, &ins, &outs, class, seed.wrapping_add(i as u64));
        interp.bind(g, b)?;
    }
    Ok(())
}

fn entity(doc: &Document, name: &str) -> Result<Diagram, Fail> {
    doc.resolve(name).ok_or_else(|| Fail(format!("unknown entity `{name}`")))
}

fn violation_size(v: &MapViolation) -> f64 {
    match v {
        MapViolation::NegativeEntry { value, .. } => value.abs(),
        MapViolation::ColumnSum { sum, .. } => (sum - 1.0).abs(),
        MapViolation::NotHermitian { deviation } | MapViolation::NotTracePreserving { deviation } => *deviation,
        MapViolation::NotPositive { min_eigenvalue } => min_eigenvalue.abs(),
        MapViolation::TraceIncreasing { excess } => *excess,
    }
}

fn dispatch(cmd: &Command) -> Result<CommandResult, Fail> {
    let name = cmd.name();
    match cmd {
        Command::Parse(common) => {
            let (doc, _) = load_document(common)?;
            let mut diagnostics = Vec::new();
            let mut residual: f64 = 0.0;
            for g in doc.generators() {
                let Some(b) = doc.interpretation().binding(g.name()) else { continue };
                let class = match b {
                    Binding::Stochastic(_) => MapClass::Stochastic,
                    Binding::Channel(_) => MapClass::Cptp,
                };
                for v in b.validate(class) {
                    residual = residual.max(violation_size(&v));
                    diagnostics.push(format!("box {}: {v}", g.name()));
                }
            }
            let mut r = CommandResult::verdict(name, diagnostics.is_empty(), residual);
            r.diagnostics = diagnostics;
            r.diagnostics.push(format!(
                "{} backend: {} systems, {} boxes, {} diagrams, {} posets, {} networks",
                match doc.backend() {
                    Backend::FinStoch => "finstoch",
                    Backend::Quantum => "quantum",
                },
                doc.signature().systems().count(),
                doc.generators().len(),
                doc.diagrams().len(),
                doc.posets().len(),
                doc.networks().len()
            ));
            Ok(r)
        }
        Command::Eval { common, name: target } => {
            let (doc, tol) = load_document(common)?;
            let d = entity(&doc, target)?;
            let map = evaluate(&d, doc.interpretation())?;
            let term = check_terminal_process(&d, doc.interpretation(), tol)?;
            let mut r = CommandResult::verdict(name, term.is_terminal, term.residual);
            if let Some(s) = map.scalar() {
                r.verdict = Verdict::Value(s.re);
                if s.im != 0.0 {
                    r.diagnostics.push(format!("imaginary part {:.3e}", s.im));
                }
            }
            r.diagnostics.push(format!(
                "{target}: {:?} -> {:?}",
                map.in_dims(),
                map.out_dims()
            ));
            if !term.is_terminal {
                r.diagnostics.push(format!("{target} is not normalised"));
            }
            r.witness = Some(witness(&map, common.repr));
            Ok(r)
        }
        Command::CheckTerminal { common, name: target } => {
            let (doc, tol) = load_document(common)?;
            let report = match target {
                Some(t) => check_terminal_process(&entity(&doc, t)?, doc.interpretation(), tol)?,
                None => check_terminal_theory(doc.interpretation(), &doc.generators(), tol)?,
            };
            let mut r = CommandResult::verdict(name, report.is_terminal, report.residual);
            if let Some(b) = &report.worst_box {
                let word = if report.is_terminal { "largest residual at" } else { "not terminal at box" };
                r.diagnostics.push(format!("{word} {b}"));
            }
            Ok(r)
        }
        Command::CheckNonsig {
            common,
            name: target,
            a_in,
            a_out,
            parties,
        } => {
            let (doc, tol) = load_document(common)?;
            let (d, split) = if !parties.party_a.is_empty() || !parties.party_b.is_empty() {
                let dn = diamond(&doc, target, parties)?;
                (dn.to_diagram(), Split::leading(dn.x_a().len(), dn.y_a().len()))
            } else {
                let d = entity(&doc, target)?;
                let split = Split::new(
                    a_in.clone().unwrap_or_else(|| (0..d.inputs().len().div_ceil(2)).collect()),
                    a_out.clone().unwrap_or_else(|| (0..d.outputs().len().div_ceil(2)).collect()),
                );
                (d, split)
            };
            let map = evaluate(&d, doc.interpretation())?;
            let report = check_nonsignalling(&map, &split, tol)?;
            let mut r = CommandResult::verdict(name, report.non_signalling(), report.residual());
            r.diagnostics.push(format!(
                "A -> B: {} (residual {:.3e})",
                if report.a_to_b_blocked { "blocked" } else { "signals" },
                report.residual_ab
            ));
            r.diagnostics.push(format!(
                "B -> A: {} (residual {:.3e})",
                if report.b_to_a_blocked { "blocked" } else { "signals" },
                report.residual_ba
            ));
            r.witness = report.witness_h.as_ref().map(|h| witness(h, common.repr));
            Ok(r)
        }
        Command::DiamondWitness {
            common,
            name: target,
            parties,
        } => {
            let (doc, tol) = load_document(common)?;
            let dn = diamond(&doc, target, parties)?;
            let w = match theorem1_witness(&dn, doc.interpretation(), tol) {
                Ok(w) => w,
                Err(e @ CheckError::NotTerminal { .. }) => {
                    let mut r = CommandResult::verdict(name, false, 0.0);
                    if let CheckError::NotTerminal { residual, .. } = &e {
                        r.residual = finite(*residual);
                    }
                    r.diagnostics.push(e.to_string());
                    return Ok(r);
                }
                Err(e) => return Err(e.into()),
            };
            let mut r = CommandResult::verdict(name, w.holds(), w.residual_h.max(w.residual_h_prime));
            r.diagnostics.push(format!("h residual {:.3e}", w.residual_h));
            r.diagnostics.push(format!("h' residual {:.3e}", w.residual_h_prime));
            r.diagnostics.push(format!(
                "agreement with least-squares witnesses: h {:.3e}, h' {:.3e}",
                finite(w.agreement_h),
                finite(w.agreement_h_prime)
            ));
            r.witness = Some(witness(&w.h, common.repr));
            Ok(r)
        }
        Command::Bang {
            common,
            enumerate,
            max_size,
        } => {
            let (doc, tol) = load_document(common)?;
            let method = if *enumerate {
                BangMethod::ClosedDiagramEnumeration
            } else {
                BangMethod::NormalizationAndTerminality
            };
            let report = check_bang(doc.interpretation(), &doc.generators(), method, *max_size, tol)?;
            let residual = report.counterexample.as_ref().map_or(0.0, |c| (c.scalar - 1.0).abs());
            let mut r = CommandResult::verdict(name, report.holds, residual);
            r.diagnostics.push(format!("method {}, {} closed diagrams checked", method.as_str(), report.checked));
            if report.truncated {
                r.diagnostics.push("enumeration stopped at its cap".into());
            }
            if let Some(c) = &report.counterexample {
                let gens: Vec<&str> = c.diagram.generator_names().collect();
                r.diagnostics.push(format!(
                    "closed diagram with scalar {} uses [{}]",
                    round12(c.scalar),
                    gens.join(", ")
                ));
            }
            Ok(r)
        }
        Command::AuditTheorem2(common) => {
            let (doc, tol) = load_document(common)?;
            let audit = theorem2_audit(doc.interpretation(), &doc.generators(), tol)?;
            let residual = audit
                .embeddings
                .iter()
                .map(|e| e.residual.max((e.scalar - 1.0).abs()).max(e.terminal_residual))
                .fold(0.0, f64::max);
            let mut r = CommandResult::verdict(name, audit.passes(), residual);
            r.diagnostics = audit.diagnostics.clone();
            if !audit.contract_holds {
                r.diagnostics.push("(!) and non-signalling hold but the theory is not terminal".into());
            }
            Ok(r)
        }
        Command::Lhv { common, vertex_cap } => {
            let (beh, tol) = load_behavior(common)?;
            let cert = lhv_feasible(&beh, tol, *vertex_cap)?;
            let mut r = CommandResult::verdict(name, cert.feasible, cert.residual);
            r.diagnostics.push(format!("{} deterministic strategies", cert.vertices));
            let [na, nb, nx, ny] = beh.sizes();
            if cert.feasible {
                for (s, w) in &cert.weights {
                    r.diagnostics.push(format!("weight {w:.6} on a = {:?}[x], b = {:?}[y]", s.lambda, s.mu));
                }
                r.witness = Some(table_witness(1, cert.weights.len(), cert.weights.iter().map(|w| w.1).collect()));
            } else if let Some(f) = &cert.farkas {
                r.diagnostics.push(format!(
                    "separating functional: {:.6} on the table, at most 0 on every local strategy",
                    cert.margin
                ));
                r.witness = Some(table_witness(nx * ny, na * nb, f.clone()));
            }
            Ok(r)
        }
        Command::BehaviorNs(common) => {
            let (beh, tol) = load_behavior(common)?;
            let (ok, residual) = behavior_nonsignalling(&beh, tol);
            let mut r = CommandResult::verdict(name, ok, residual);
            if !ok {
                r.diagnostics.push(format!("marginals depend on the other party's input by {residual:.3e}"));
            }
            Ok(r)
        }
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn diamond(doc: &Document, target: &str, parties: &Parties) -> Result<causalkit::causal::DiamondNetwork, Fail> {
    let net = doc
        .network(target)
        .ok_or_else(|| Fail(format!("unknown network `{target}`")))?;
    let pick = |names: &[String], fallback: &str| -> Result<Vec<usize>, Fail> {
        let names = if names.is_empty() {
            vec![fallback.to_string()]
        } else {
            names.to_vec()
        };
        names
            .iter()
            .map(|n| net.structure().index_of(n).map_err(Fail::from))
            .collect()
    };
    let a = pick(&parties.party_a, "a")?;
    let b = pick(&parties.party_b, "b")?;
    Ok(diamond_normal_form(net, &a, &b)?)
}

/// Entry point for the binary: prints the result and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli.command);
    let format = cli.command.common().format;
    print!("{}", result.render(format));
    result.exit_code
}
