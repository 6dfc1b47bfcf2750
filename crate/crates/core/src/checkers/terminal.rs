use std::sync::Arc;

use serde::Serialize;

use super::CheckError;
use crate::diagram::{fmt_labels, seq, BoxKind, BoxSignature, Diagram};
use crate::semantics::{discard_rows, evaluate, ConcreteMap, Interpretation, MapMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerminalityReport {
    pub is_terminal: bool,
    /// Generator with the largest residual, when one is involved.
    pub worst_box: Option<String>,
    pub residual: f64,
    pub tol: f64,
}

/// Compare `discard ∘ f` with discarding the inputs of `f`, in max-norm.
pub fn check_terminal_process(f: &Diagram, interp: &Interpretation, tol: f64) -> Result<TerminalityReport, CheckError> {
    let residual = terminal_residual(f, interp)?;
    let worst_box = match f.nodes() {
        [single] if single.kind() == BoxKind::Generator => Some(single.name().to_string()),
        _ => None,
    };
    Ok(TerminalityReport {
        is_terminal: residual <= tol,
        worst_box,
        residual,
        tol,
    })
}

pub(crate) fn terminal_residual(f: &Diagram, interp: &Interpretation) -> Result<f64, CheckError> {
    let lhs = evaluate(&seq(f, &Diagram::discard_all(f.outputs()))?, interp)?;
    let rhs = evaluate(&Diagram::discard_all(f.inputs()), interp)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Terminality of every generator; by compositionality this decides the
/// whole theory. The report names the generator with the largest residual.
pub fn check_terminal_theory(
    interp: &Interpretation,
    generators: &[Arc<BoxSignature>],
    tol: f64,
) -> Result<TerminalityReport, CheckError> {
    let mut worst: Option<(String, f64)> = None;
    for g in generators {
        let r = terminal_residual(&Diagram::single(g.clone()), interp)?;
        if worst.as_ref().is_none_or(|(_, w)| r > *w) {
            worst = Some((g.name().to_string(), r));
        }
    }
    let residual = worst.as_ref().map_or(0.0, |w| w.1);
    Ok(TerminalityReport {
        is_terminal: residual <= tol,
        worst_box: worst.map(|w| w.0),
        residual,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectCheck {
    pub holds: bool,
    /// Index of the first candidate that is not the discarding effect.
    pub offender: Option<usize>,
    pub residual: f64,
}

/// Whether every candidate effect evaluates to discarding.
pub fn unique_effect_check(
    interp: &Interpretation,
    candidates: &[Diagram],
    tol: f64,
) -> Result<EffectCheck, CheckError> {
    let mut out = EffectCheck {
        holds: true,
        offender: None,
        residual: 0.0,
    };
    for (index, c) in candidates.iter().enumerate() {
        if !c.outputs().is_empty() {
            return Err(CheckError::NotAnEffect {
                index,
                outputs: fmt_labels(c.outputs()),
            });
        }
        let m = evaluate(c, interp)?;
        let dims = interp.dims_of(c.inputs())?;
        let disc = match m.matrix() {
            MapMatrix::Real(_) => ConcreteMap::real(dims.clone(), vec![], discard_rows(interp.backend(), &dims)),
            MapMatrix::Complex(_) => ConcreteMap::transfer(dims.clone(), vec![], discard_rows(interp.backend(), &dims)),
        };
        let r = m.max_abs_diff(&disc);
        out.residual = out.residual.max(r);
        if r > tol && out.offender.is_none() {
            out.holds = false;
            out.offender = Some(index);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::SystemLabel;
    use crate::semantics::{Backend, Binding, QuantumChannel, StochasticMap};

    fn setup(rows: &[Vec<f64>]) -> (Interpretation, Arc<BoxSignature>) {
        let a = SystemLabel::normal("A");
        let mut interp = Interpretation::new(Backend::FinStoch);
        interp.set_dim("A", rows[0].len()).unwrap();
        let sig = Arc::new(BoxSignature::generator("f", vec![a.clone()], vec![a]));
        interp
            .bind(&sig, Binding::Stochastic(StochasticMap::from_rows(rows).unwrap()))
            .unwrap();
        (interp, sig)
    }

    #[test]
    fn stochastic_is_terminal() {
        let (interp, f) = setup(&[vec![0.5, 0.3], vec![0.5, 0.7]]);
        let r = check_terminal_process(&Diagram::single(f), &interp, 1e-9).unwrap();
        assert!(r.is_terminal);
        assert!(r.residual < 1e-15);
        assert_eq!(r.worst_box.as_deref(), Some("f"));
    }

    #[test]
    fn substochastic_residual() {
        let (interp, f) = setup(&[vec![0.5, 0.3], vec![0.4, 0.6]]);
        let r = check_terminal_theory(&interp, &[f], 1e-9).unwrap();
        assert!(!r.is_terminal);
        assert!((r.residual - 0.1).abs() < 1e-12);
        assert_eq!(r.worst_box.as_deref(), Some("f"));
    }

    #[test]
    fn empty_theory_is_terminal() {
        let interp = Interpretation::new(Backend::FinStoch);
        let r = check_terminal_theory(&interp, &[], 1e-9).unwrap();
        assert!(r.is_terminal);
        assert_eq!(r.worst_box, None);
    }

    #[test]
    fn quantum_identity_is_terminal() {
        let a = SystemLabel::normal("A");
        let mut interp = Interpretation::new(Backend::Quantum);
        interp.set_dim("A", 2).unwrap();
        let sig = Arc::new(BoxSignature::generator("u", vec![a.clone()], vec![a]));
        interp.bind(&sig, Binding::Channel(QuantumChannel::identity(2))).unwrap();
        let r = check_terminal_process(&Diagram::single(sig), &interp, 1e-7).unwrap();
        assert!(r.is_terminal);
    }

    #[test]
    fn effects_must_be_discarding() {
        let a = SystemLabel::normal("A");
        let mut interp = Interpretation::new(Backend::FinStoch);
        interp.set_dim("A", 2).unwrap();
        let e = Arc::new(BoxSignature::generator("e", vec![a.clone()], vec![]));
        interp
            .bind(&e, Binding::Stochastic(StochasticMap::from_rows(&[vec![0.5, 1.0]]).unwrap()))
            .unwrap();
        let ok = unique_effect_check(&interp, &[Diagram::discard(&a)], 1e-9).unwrap();
        assert!(ok.holds);
        let bad = unique_effect_check(&interp, &[Diagram::discard(&a), Diagram::single(e)], 1e-9).unwrap();
        assert!(!bad.holds);
        assert_eq!(bad.offender, Some(1));
        let err = unique_effect_check(&interp, &[Diagram::identity(&a)], 1e-9).unwrap_err();
        assert!(matches!(err, CheckError::NotAnEffect { index: 0, .. }));
    }
}
