use std::sync::Arc;

use super::bang::{check_bang, BangMethod, BangReport, DEFAULT_MAX_SIZE};
use super::nonsig::{check_nonsignalling, NonSigReport, Split};
use super::terminal::{check_terminal_process, terminal_residual};
use super::CheckError;
use crate::causal::DiamondNetwork;
use crate::diagram::{par, par_all, seq, BoxKind, BoxSignature, Diagram, SystemLabel};
use crate::semantics::{evaluate, ConcreteMap, Interpretation};

/// The witnesses `h` and `h'` built from a terminal diamond by discarding
/// the top process and then the other party, checked against the composite.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Witness {
    /// Least-squares verdict on the flattened composite.
    pub report: NonSigReport,
    pub h_diagram: Diagram,
    pub h_prime_diagram: Diagram,
    pub h: ConcreteMap,
    pub h_prime: ConcreteMap,
    /// Max-norm defect of the two non-signalling equations with the
    /// constructed witnesses.
    pub residual_h: f64,
    pub residual_h_prime: f64,
    /// Distance between the constructed and least-squares witnesses;
    /// infinite when the latter is absent.
    pub agreement_h: f64,
    pub agreement_h_prime: f64,
    pub tol: f64,
}

impl Theorem1Witness {
    pub fn holds(&self) -> bool {
        self.residual_h <= self.tol && self.residual_h_prime <= self.tol
    }
}

fn cluster_name(d: &Diagram, fallback: &str) -> String {
    match d.nodes() {
        [single] if single.kind() == BoxKind::Generator => single.name().to_string(),
        _ => fallback.to_string(),
    }
}

/// `(discard_before ⊗ id_keep ⊗ discard_after) ∘ bot`, the marginal of the
/// bottom state on the middle block of its outputs.
fn marginal(bot: &Diagram, before: &[SystemLabel], keep: &[SystemLabel], after: &[SystemLabel]) -> Result<Diagram, CheckError> {
    let cut = par_all([
        &Diagram::discard_all(before),
        &Diagram::identity_on(keep),
        &Diagram::discard_all(after),
    ]);
    Ok(seq(bot, &cut)?)
}

/// Build the witnesses of non-signalling for a diamond over a terminal
/// theory. The four processes are checked for terminality first.
pub fn theorem1_witness(dn: &DiamondNetwork, interp: &Interpretation, tol: f64) -> Result<Theorem1Witness, CheckError> {
    for (d, name) in [(dn.bot(), "bot"), (dn.a(), "a"), (dn.b(), "b"), (dn.top(), "top")] {
        let r = check_terminal_process(d, interp, tol)?;
        if !r.is_terminal {
            return Err(CheckError::NotTerminal {
                name: cluster_name(d, name),
                residual: r.residual,
            });
        }
    }
    let (xa, ya, xb, yb) = (dn.x_a(), dn.y_a(), dn.x_b(), dn.y_b());
    let (l, r, m) = (dn.left(), dn.right(), dn.middle());

    let to_r = marginal(dn.bot(), l, r, m)?;
    let h_diagram = seq(
        &seq(&par(&Diagram::identity_on(xb), &to_r), dn.b())?,
        &par(&Diagram::identity_on(yb), &Diagram::discard_all(dn.right_up())),
    )?;
    let to_l = marginal(dn.bot(), &[], l, &[r, m].concat())?;
    let h_prime_diagram = seq(
        &seq(&par(&Diagram::identity_on(xa), &to_l), dn.a())?,
        &par(&Diagram::identity_on(ya), &Diagram::discard_all(dn.left_up())),
    )?;

    let composite = dn.to_diagram();
    let lhs = evaluate(
        &seq(&composite, &par(&Diagram::discard_all(ya), &Diagram::identity_on(yb)))?,
        interp,
    )?;
    let rhs = evaluate(
        &seq(&par(&Diagram::discard_all(xa), &Diagram::identity_on(xb)), &h_diagram)?,
        interp,
    )?;
    let lhs2 = evaluate(
        &seq(&composite, &par(&Diagram::identity_on(ya), &Diagram::discard_all(yb)))?,
        interp,
    )?;
    let rhs2 = evaluate(
        &seq(&par(&Diagram::identity_on(xa), &Diagram::discard_all(xb)), &h_prime_diagram)?,
        interp,
    )?;

    let report = check_nonsignalling(&evaluate(&composite, interp)?, &Split::leading(xa.len(), ya.len()), tol)?;
    let h = evaluate(&h_diagram, interp)?;
    let h_prime = evaluate(&h_prime_diagram, interp)?;
    let agree = |w: &Option<ConcreteMap>, c: &ConcreteMap| w.as_ref().map_or(f64::INFINITY, |w| w.max_abs_diff(c));
    Ok(Theorem1Witness {
        agreement_h: agree(&report.witness_h, &h),
        agreement_h_prime: agree(&report.witness_h_prime, &h_prime),
        report,
        residual_h: lhs.max_abs_diff(&rhs),
        residual_h_prime: lhs2.max_abs_diff(&rhs2),
        h_diagram,
        h_prime_diagram,
        h,
        h_prime,
        tol,
    })
}

/// One generator placed as party B with a trivial party A.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingAudit {
    pub generator: String,
    pub nonsignalling: bool,
    pub residual: f64,
    /// The scalar `discard ∘ f ∘ uniform`; equal to the witness `h'` when
    /// the embedding is non-signalling.
    pub scalar: f64,
    pub terminal: bool,
    pub terminal_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Audit {
    pub bang: BangReport,
    pub embeddings: Vec<EmbeddingAudit>,
    pub all_nonsignalling: bool,
    pub theory_terminal: bool,
    /// (!) and non-signalling of every embedding together force terminality.
    pub contract_holds: bool,
    pub diagnostics: Vec<String>,
}

impl Theorem2Audit {
    pub fn passes(&self) -> bool {
        self.bang.holds && self.all_nonsignalling && self.theory_terminal
    }
}

pub(crate) fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Embed each generator with a trivial other party and relate
/// non-signalling, (!) and terminality.
pub fn theorem2_audit(
    interp: &Interpretation,
    generators: &[Arc<BoxSignature>],
    tol: f64,
) -> Result<Theorem2Audit, CheckError> {
    let bang = check_bang(interp, generators, BangMethod::NormalizationAndTerminality, DEFAULT_MAX_SIZE, tol)?;
    let mut embeddings = Vec::with_capacity(generators.len());
    let mut diagnostics = Vec::new();
    for g in generators {
        let single = Diagram::single(g.clone());
        let f = evaluate(&single, interp)?;
        let ns = check_nonsignalling(&f, &Split::default(), tol)?;
        let feed = par_all(&g.inputs().iter().map(Diagram::uniform).collect::<Vec<_>>());
        let closed = seq(&seq(&feed, &single)?, &Diagram::discard_all(g.outputs()))?;
        let scalar = evaluate(&closed, interp)?.scalar().expect("closed diagram").re;
        let terminal_residual = terminal_residual(&single, interp)?;
        let e = EmbeddingAudit {
            generator: g.name().to_string(),
            nonsignalling: ns.non_signalling(),
            residual: ns.residual(),
            scalar,
            terminal: terminal_residual <= tol,
            terminal_residual,
        };
        if e.nonsignalling && !e.terminal {
            diagnostics.push(format!("{}: (!) violated, scalar {}", e.generator, round12(scalar)));
        } else if !e.nonsignalling {
            diagnostics.push(format!("{}: embedding signals, residual {:.3e}", e.generator, e.residual));
        }
        embeddings.push(e);
    }
    let all_nonsignalling = embeddings.iter().all(|e| e.nonsignalling);
    let theory_terminal = embeddings.iter().all(|e| e.terminal);
    if let Some(c) = &bang.counterexample {
        diagnostics.push(format!("(!) fails: closed diagram with scalar {}", round12(c.scalar)));
    }
    Ok(Theorem2Audit {
        contract_holds: !(bang.holds && all_nonsignalling) || theory_terminal,
        bang,
        embeddings,
        all_nonsignalling,
        theory_terminal,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::PartyPorts;
    use crate::semantics::{random_generator, Backend, Binding, MapClass, StochasticMap};

    fn lab(n: &str) -> SystemLabel {
        SystemLabel::normal(n)
    }

    fn gen(name: &str, ins: &[&str], outs: &[&str]) -> Arc<BoxSignature> {
        Arc::new(BoxSignature::generator(
            name,
            ins.iter().map(|s| lab(s)).collect(),
            outs.iter().map(|s| lab(s)).collect(),
        ))
    }

    fn random_diamond(backend: Backend, seed: u64) -> (DiamondNetwork, Interpretation) {
        let mut interp = Interpretation::new(backend);
        for s in ["Xa", "Xb", "Ya", "Yb", "L", "R", "L2", "R2"] {
            interp.set_dim(s, 2).unwrap();
        }
        let boxes = [
            gen("f_bot", &[], &["L", "R"]),
            gen("f_a", &["Xa", "L"], &["Ya", "L2"]),
            gen("f_b", &["Xb", "R"], &["Yb", "R2"]),
            gen("f_top", &["L2", "R2"], &[]),
        ];
        for (k, b) in boxes.iter().enumerate() {
            let ind = interp.dims_of(b.inputs()).unwrap();
            let outd = interp.dims_of(b.outputs()).unwrap();
            let class = if b.outputs().is_empty() {
                MapClass::Stochastic
            } else {
                MapClass::Cptp
            };
            let binding = if b.outputs().is_empty() && backend == Backend::FinStoch {
                Binding::Stochastic(StochasticMap::new(nalgebra::DMatrix::from_element(1, 4, 1.0)).unwrap())
            } else if b.outputs().is_empty() {
                // the only terminal effect is the trace
                Binding::Channel(crate::semantics::QuantumChannel::from_transfer(
                    crate::semantics::discard_rows(backend, &[2, 2]),
                    ind.clone(),
                    vec![],
                )
                .unwrap())
            } else {
                random_generator(backend, &ind, &outd, class, seed * 4 + k as u64)
            };
            interp.bind(b, binding).unwrap();
        }
        let d = |b: &Arc<BoxSignature>| Diagram::single(b.clone());
        let dn = DiamondNetwork::new(d(&boxes[0]), d(&boxes[1]), d(&boxes[2]), d(&boxes[3]), PartyPorts::SINGLE).unwrap();
        (dn, interp)
    }

    #[test]
    fn terminal_diamond_has_witnesses() {
        let (dn, interp) = random_diamond(Backend::FinStoch, 11);
        let w = theorem1_witness(&dn, &interp, 1e-9).unwrap();
        assert!(w.holds());
        assert!(w.report.non_signalling());
        assert!(w.agreement_h <= 1e-9 && w.agreement_h_prime <= 1e-9);
    }

    #[test]
    fn quantum_diamond_has_witnesses() {
        let (dn, interp) = random_diamond(Backend::Quantum, 3);
        let w = theorem1_witness(&dn, &interp, 1e-7).unwrap();
        assert!(w.holds());
        assert!(w.report.non_signalling());
        assert!(w.agreement_h <= 1e-7);
    }

    #[test]
    fn non_terminal_box_is_an_error() {
        let (dn, mut interp) = random_diamond(Backend::FinStoch, 1);
        let fa = dn.a().nodes()[0].clone();
        interp
            .bind(&fa, random_generator(Backend::FinStoch, &[2, 2], &[2, 2], MapClass::Substochastic, 5))
            .unwrap();
        let err = theorem1_witness(&dn, &interp, 1e-9).unwrap_err();
        assert!(err.to_string().starts_with("theory not terminal at box f_a"), "{err}");
    }

    #[test]
    fn halved_theory_violates_bang() {
        let mut interp = Interpretation::new(Backend::FinStoch);
        interp.set_dim("A", 2).unwrap();
        let f = gen("f", &["A"], &["A"]);
        interp
            .bind(&f, Binding::Stochastic(StochasticMap::from_rows(&[vec![0.25, 0.1], vec![0.25, 0.4]]).unwrap()))
            .unwrap();
        let audit = theorem2_audit(&interp, &[f], 1e-9).unwrap();
        assert!(!audit.passes());
        assert!(!audit.bang.holds);
        assert!(audit.all_nonsignalling);
        assert!(!audit.theory_terminal);
        assert!(audit.contract_holds);
        assert_eq!(audit.diagnostics[0], "f: (!) violated, scalar 0.5");
    }

    #[test]
    fn empty_theory_audit_passes() {
        let interp = Interpretation::new(Backend::FinStoch);
        let audit = theorem2_audit(&interp, &[], 1e-9).unwrap();
        assert!(audit.passes());
        assert!(audit.diagnostics.is_empty());
    }
}
