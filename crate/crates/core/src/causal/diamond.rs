use std::ops::RangeInclusive;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CausalError, CausalProcessNetwork, CausalStructure, NetworkWire, PortRef};
use crate::diagram::{BoxSignature, Diagram, SystemLabel};
use crate::semantics::{random_generator, Backend, Interpretation, MapClass};

/// Number of open ports of each party in a [`DiamondNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartyPorts {
    pub x_a: usize,
    pub y_a: usize,
    pub x_b: usize,
    pub y_b: usize,
}

impl PartyPorts {
    /// One input and one output per party.
    pub const SINGLE: PartyPorts = PartyPorts {
        x_a: 1,
        y_a: 1,
        x_b: 1,
        y_b: 1,
    };
}

/// The two-party scenario over `bot < a, b < top`.
///
/// Port layout of the four processes:
///
/// ```text
/// bot : []            -> L ++ R ++ M
/// a   : X_a ++ L      -> Y_a ++ L'
/// b   : X_b ++ R      -> Y_b ++ R'
/// top : L' ++ R' ++ M -> []
/// ```
///
/// `M` holds wires running from `bot` straight to `top`. Each of `L`, `R`,
/// `L'`, `R'`, `M` may carry any number of systems.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondNetwork {
    bot: Diagram,
    a: Diagram,
    b: Diagram,
    top: Diagram,
    ports: PartyPorts,
    /// Original node ports behind the composite boundary, when the diamond
    /// was obtained by [`diamond_normal_form`].
    pub origin: Option<(Vec<PortRef>, Vec<PortRef>)>,
}

impl DiamondNetwork {
    pub fn new(bot: Diagram, a: Diagram, b: Diagram, top: Diagram, ports: PartyPorts) -> Result<Self, CausalError> {
        let bad = |what: &str| Err(CausalError::NotADiamond(what.to_string()));
        if !bot.inputs().is_empty() {
            return bad("bot has open inputs");
        }
        if !top.outputs().is_empty() {
            return bad("top has open outputs");
        }
        if a.inputs().len() < ports.x_a || a.outputs().len() < ports.y_a {
            return bad("party a has fewer ports than declared");
        }
        if b.inputs().len() < ports.x_b || b.outputs().len() < ports.y_b {
            return bad("party b has fewer ports than declared");
        }
        let l = &a.inputs()[ports.x_a..];
        let r = &b.inputs()[ports.x_b..];
        let l2 = &a.outputs()[ports.y_a..];
        let r2 = &b.outputs()[ports.y_b..];
        let bot_out = bot.outputs();
        if bot_out.len() < l.len() + r.len() || &bot_out[..l.len()] != l || &bot_out[l.len()..l.len() + r.len()] != r {
            return bad("bot outputs do not match the inputs of a and b");
        }
        let m = &bot_out[l.len() + r.len()..];
        let want_top: Vec<SystemLabel> = l2.iter().chain(r2).chain(m).cloned().collect();
        if top.inputs() != want_top.as_slice() {
            return bad("top inputs do not match the outputs of a, b and bot");
        }
        Ok(DiamondNetwork {
            bot,
            a,
            b,
            top,
            ports,
            origin: None,
        })
    }

    pub fn bot(&self) -> &Diagram {
        &self.bot
    }

    pub fn a(&self) -> &Diagram {
        &self.a
    }

    pub fn b(&self) -> &Diagram {
        &self.b
    }

    pub fn top(&self) -> &Diagram {
        &self.top
    }

    pub fn ports(&self) -> PartyPorts {
        self.ports
    }

    pub fn x_a(&self) -> &[SystemLabel] {
        &self.a.inputs()[..self.ports.x_a]
    }

    pub fn y_a(&self) -> &[SystemLabel] {
        &self.a.outputs()[..self.ports.y_a]
    }

    pub fn x_b(&self) -> &[SystemLabel] {
        &self.b.inputs()[..self.ports.x_b]
    }

    pub fn y_b(&self) -> &[SystemLabel] {
        &self.b.outputs()[..self.ports.y_b]
    }

    /// Systems on the `bot -> a` wires.
    pub fn left(&self) -> &[SystemLabel] {
        &self.a.inputs()[self.ports.x_a..]
    }

    /// Systems on the `bot -> b` wires.
    pub fn right(&self) -> &[SystemLabel] {
        &self.b.inputs()[self.ports.x_b..]
    }

    /// Systems on the `a -> top` wires.
    pub fn left_up(&self) -> &[SystemLabel] {
        &self.a.outputs()[self.ports.y_a..]
    }

    /// Systems on the `b -> top` wires.
    pub fn right_up(&self) -> &[SystemLabel] {
        &self.b.outputs()[self.ports.y_b..]
    }

    /// Systems on the `bot -> top` wires.
    pub fn middle(&self) -> &[SystemLabel] {
        &self.bot.outputs()[self.left().len() + self.right().len()..]
    }

    pub fn to_network(&self) -> CausalProcessNetwork {
        let (l, r, m) = (self.left().len(), self.right().len(), self.middle().len());
        let (l2, r2) = (self.left_up().len(), self.right_up().len());
        let p = self.ports;
        let wire = |fnode, fport, tnode, tport| NetworkWire {
            from: PortRef { node: fnode, port: fport },
            to: PortRef { node: tnode, port: tport },
        };
        let mut wires = Vec::new();
        wires.extend((0..l).map(|k| wire(0, k, 1, p.x_a + k)));
        wires.extend((0..r).map(|k| wire(0, l + k, 2, p.x_b + k)));
        wires.extend((0..m).map(|k| wire(0, l + r + k, 3, l2 + r2 + k)));
        wires.extend((0..l2).map(|k| wire(1, p.y_a + k, 3, k)));
        wires.extend((0..r2).map(|k| wire(2, p.y_b + k, 3, l2 + k)));
        CausalProcessNetwork::new(
            CausalStructure::diamond(),
            vec![self.bot.clone(), self.a.clone(), self.b.clone(), self.top.clone()],
            wires,
        )
        .expect("a validated diamond is a valid network")
    }

    /// The composite process, with boundary `X_a ++ X_b -> Y_a ++ Y_b`.
    pub fn to_diagram(&self) -> Diagram {
        self.to_network()
            .flatten()
            .expect("a validated diamond flattens")
            .diagram
    }
}

/// Cluster a network into the diamond with the given parties.
///
/// Nodes outside both parties that lie above no party node go to `bot`;
/// those above some party node and below none go to `top`. A node above one
/// party node and below another has no place in a diamond and is an error.
pub fn diamond_normal_form(
    net: &CausalProcessNetwork,
    party_a: &[usize],
    party_b: &[usize],
) -> Result<DiamondNetwork, CausalError> {
    let cs = net.structure();
    let names = |xs: &[usize]| xs.iter().map(|&x| cs.elements()[x].clone()).collect::<Vec<_>>();
    if party_a.is_empty() || party_b.is_empty() {
        return Err(CausalError::EmptyParty);
    }
    if let Some(&x) = party_a.iter().find(|x| party_b.contains(x)) {
        return Err(CausalError::PartiesOverlap(cs.elements()[x].clone()));
    }
    for &x in party_a {
        for &y in party_b {
            if cs.comparable(x, y) {
                let (lo, hi) = if cs.less(x, y) { (x, y) } else { (y, x) };
                return Err(CausalError::PartiesComparable {
                    lower: cs.elements()[lo].clone(),
                    upper: cs.elements()[hi].clone(),
                });
            }
        }
    }

    const BOT: usize = 0;
    const A: usize = 1;
    const B: usize = 2;
    const TOP: usize = 3;
    let party: Vec<usize> = party_a.iter().chain(party_b).copied().collect();
    let mut cluster_of = vec![BOT; cs.len()];
    for n in 0..cs.len() {
        cluster_of[n] = if party_a.contains(&n) {
            A
        } else if party_b.contains(&n) {
            B
        } else {
            let above = party.iter().any(|&p| cs.less(p, n));
            let below = party.iter().any(|&p| cs.less(n, p));
            match (above, below) {
                (false, _) => BOT,
                (true, false) => TOP,
                (true, true) => {
                    return Err(CausalError::NoDiamondReduction {
                        node: cs.elements()[n].clone(),
                        detail: "lies above one party node and below another".into(),
                    })
                }
            }
        };
    }
    for (cluster, who) in [(A, party_a), (B, party_b)] {
        // a party must be convex: nothing outside it between two of its nodes
        for n in 0..cs.len() {
            if cluster_of[n] != cluster
                && who.iter().any(|&p| cs.less(p, n))
                && who.iter().any(|&p| cs.less(n, p))
            {
                return Err(CausalError::NoDiamondReduction {
                    node: cs.elements()[n].clone(),
                    detail: format!("lies between nodes of party {:?}", names(who)),
                });
            }
        }
    }

    let wired_in: Vec<PortRef> = net.wires().iter().map(|w| w.to).collect();
    let wired_out: Vec<PortRef> = net.wires().iter().map(|w| w.from).collect();
    for n in 0..cs.len() {
        if cluster_of[n] == BOT || cluster_of[n] == TOP {
            let p = &net.processes()[n];
            let open_in = (0..p.inputs().len()).any(|port| !wired_in.contains(&PortRef { node: n, port }));
            let open_out = (0..p.outputs().len()).any(|port| !wired_out.contains(&PortRef { node: n, port }));
            if open_in || open_out {
                return Err(CausalError::NoDiamondReduction {
                    node: cs.elements()[n].clone(),
                    detail: "open ports are only allowed at the parties".into(),
                });
            }
        }
    }

    let members: Vec<Vec<usize>> = (0..4)
        .map(|c| (0..cs.len()).filter(|&n| cluster_of[n] == c).collect())
        .collect();
    let mut flats = Vec::with_capacity(4);
    for m in &members {
        let flat = net.induced(m).flatten()?;
        let lift = |p: &PortRef| PortRef { node: m[p.node], port: p.port };
        let ins: Vec<PortRef> = flat.inputs.iter().map(lift).collect();
        let outs: Vec<PortRef> = flat.outputs.iter().map(lift).collect();
        flats.push((flat.diagram, ins, outs));
    }

    // cut wires by cluster pair, each as (position in the source cluster's
    // outputs, position in the target cluster's inputs)
    let pos = |list: &[PortRef], p: PortRef| list.iter().position(|&q| q == p).expect("cluster port");
    let mut cut: [[Vec<(usize, usize)>; 4]; 4] = Default::default();
    for w in net.wires() {
        let (cf, ct) = (cluster_of[w.from.node], cluster_of[w.to.node]);
        if cf != ct {
            cut[cf][ct].push((pos(&flats[cf].2, w.from), pos(&flats[ct].1, w.to)));
        }
    }
    for v in cut.iter_mut().flatten() {
        v.sort();
    }
    debug_assert!(cut[A][B].is_empty() && cut[B][A].is_empty());

    let open = |c: usize, inputs: bool| -> Vec<usize> {
        let (_, ins, outs) = &flats[c];
        let list = if inputs { ins } else { outs };
        let wired: Vec<usize> = (0..4)
            .flat_map(|o| if inputs { cut[o][c].iter().map(|p| p.1).collect::<Vec<_>>() } else { cut[c][o].iter().map(|p| p.0).collect() })
            .collect();
        (0..list.len()).filter(|i| !wired.contains(i)).collect()
    };

    let bot_out: Vec<usize> = cut[BOT][A]
        .iter()
        .chain(&cut[BOT][B])
        .chain(&cut[BOT][TOP])
        .map(|p| p.0)
        .collect();
    let a_in: Vec<usize> = open(A, true).into_iter().chain(cut[BOT][A].iter().map(|p| p.1)).collect();
    let a_out: Vec<usize> = open(A, false).into_iter().chain(cut[A][TOP].iter().map(|p| p.0)).collect();
    let b_in: Vec<usize> = open(B, true).into_iter().chain(cut[BOT][B].iter().map(|p| p.1)).collect();
    let b_out: Vec<usize> = open(B, false).into_iter().chain(cut[B][TOP].iter().map(|p| p.0)).collect();
    let top_in: Vec<usize> = cut[A][TOP]
        .iter()
        .chain(&cut[B][TOP])
        .chain(&cut[BOT][TOP])
        .map(|p| p.1)
        .collect();

    let ports = PartyPorts {
        x_a: open(A, true).len(),
        y_a: open(A, false).len(),
        x_b: open(B, true).len(),
        y_b: open(B, false).len(),
    };
    let origin = (
        a_in[..ports.x_a]
            .iter()
            .map(|&i| flats[A].1[i])
            .chain(b_in[..ports.x_b].iter().map(|&i| flats[B].1[i]))
            .collect(),
        a_out[..ports.y_a]
            .iter()
            .map(|&i| flats[A].2[i])
            .chain(b_out[..ports.y_b].iter().map(|&i| flats[B].2[i]))
            .collect(),
    );
    let bot = flats[BOT].0.permute_boundary(&[], &bot_out);
    let a = flats[A].0.permute_boundary(&a_in, &a_out);
    let b = flats[B].0.permute_boundary(&b_in, &b_out);
    let top = flats[TOP].0.permute_boundary(&top_in, &[]);
    let mut dn = DiamondNetwork::new(bot, a, b, top, ports)?;
    dn.origin = Some(origin);
    Ok(dn)
}

/// A diamond with seeded random normalised boxes `f_bot`, `f_a`, `f_b` and
/// discarding at `top`. Each system's dimension is drawn from `dims`; `M`
/// carries zero or one system.
pub fn random_diamond(backend: Backend, dims: RangeInclusive<usize>, seed: u64) -> (DiamondNetwork, Interpretation) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interp = Interpretation::new(backend);
    let with_m = rng.random_bool(0.5);
    let names: &[&str] = if with_m {
        &["Xa", "Ya", "Xb", "Yb", "L", "R", "Lp", "Rp", "M"]
    } else {
        &["Xa", "Ya", "Xb", "Yb", "L", "R", "Lp", "Rp"]
    };
    for n in names {
        interp
            .set_dim(n, rng.random_range(dims.clone()))
            .expect("dimension range is within bounds");
    }
    let labels = |ns: &[&str]| -> Vec<SystemLabel> { ns.iter().map(|n| SystemLabel::normal(n)).collect() };
    let mut middle = vec!["L", "R"];
    if with_m {
        middle.push("M");
    }
    let sigs = [
        BoxSignature::generator("f_bot", vec![], labels(&middle)),
        BoxSignature::generator("f_a", labels(&["Xa", "L"]), labels(&["Ya", "Lp"])),
        BoxSignature::generator("f_b", labels(&["Xb", "R"]), labels(&["Yb", "Rp"])),
    ];
    let class = match backend {
        Backend::FinStoch => MapClass::Stochastic,
        Backend::Quantum => MapClass::Cptp,
    };
    let mut parts = Vec::new();
    for (k, sig) in sigs.into_iter().enumerate() {
        let ins = interp.dims_of(sig.inputs()).expect("declared above");
        let outs = interp.dims_of(sig.outputs()).expect("declared above");
        let b = random_generator(backend, &ins, &outs, class, seed.wrapping_mul(4).wrapping_add(k as u64));
        interp.bind(&sig, b).expect("shapes follow the signature");
        parts.push(Diagram::single(Arc::new(sig)));
    }
    let mut up = vec!["Lp", "Rp"];
    if with_m {
        up.push("M");
    }
    let top = Diagram::discard_all(&labels(&up));
    let [bot, a, b]: [Diagram; 3] = parts.try_into().expect("three boxes");
    let dn = DiamondNetwork::new(bot, a, b, top, PartyPorts::SINGLE).expect("layout is a diamond");
    (dn, interp)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::diagram::BoxSignature;

    fn lab(n: &str) -> SystemLabel {
        SystemLabel::normal(n)
    }

    fn gen(name: &str, ins: &[&str], outs: &[&str]) -> Diagram {
        Diagram::single(Arc::new(BoxSignature::generator(
            name,
            ins.iter().map(|s| lab(s)).collect(),
            outs.iter().map(|s| lab(s)).collect(),
        )))
    }

    pub(crate) fn diamond_fixture() -> DiamondNetwork {
        DiamondNetwork::new(
            gen("f_bot", &[], &["L", "R"]),
            gen("f_a", &["Xa", "L"], &["Ya", "L2"]),
            gen("f_b", &["Xb", "R"], &["Yb", "R2"]),
            gen("f_top", &["L2", "R2"], &[]),
            PartyPorts::SINGLE,
        )
        .unwrap()
    }

    #[test]
    fn diamond_composite_boundary() {
        let d = diamond_fixture().to_diagram();
        assert_eq!(d.inputs(), &[lab("Xa"), lab("Xb")]);
        assert_eq!(d.outputs(), &[lab("Ya"), lab("Yb")]);
        assert!(d.well_formed().is_empty());
        assert_eq!(d.nodes().len(), 4);
    }

    #[test]
    fn already_diamond_is_a_fixed_point() {
        let dn = diamond_fixture();
        let again = diamond_normal_form(&dn.to_network(), &[1], &[2]).unwrap();
        assert_eq!(again.bot(), dn.bot());
        assert_eq!(again.a(), dn.a());
        assert_eq!(again.b(), dn.b());
        assert_eq!(again.top(), dn.top());
        assert_eq!(again.ports(), dn.ports());
    }

    #[test]
    fn comparable_parties_are_rejected() {
        let cs = CausalStructure::validate_structure(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("a", "b"), ("b", "top")],
        )
        .unwrap();
        let procs = vec![
            gen("f_bot", &[], &[]),
            gen("f_a", &["X"], &["Y"]),
            gen("f_b", &["X"], &["Y"]),
            gen("f_top", &[], &[]),
        ];
        let net = CausalProcessNetwork::new(cs, procs, vec![]).unwrap();
        assert_eq!(
            diamond_normal_form(&net, &[1], &[2]).unwrap_err(),
            CausalError::PartiesComparable {
                lower: "a".into(),
                upper: "b".into()
            }
        );
    }

    #[test]
    fn mismatched_layout_is_not_a_diamond() {
        let err = DiamondNetwork::new(
            gen("f_bot", &[], &["R", "L"]),
            gen("f_a", &["Xa", "L"], &["Ya"]),
            gen("f_b", &["Xb", "R"], &["Yb"]),
            Diagram::empty(),
            PartyPorts::SINGLE,
        );
        assert!(matches!(err, Err(CausalError::NotADiamond(_))));
    }
}
