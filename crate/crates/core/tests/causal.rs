mod common;

use causalkit::causal::{diamond_normal_form, CausalError, CausalStructure, DiamondNetwork, PortRef};
use causalkit::semantics::evaluate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Transitive closure by Floyd–Warshall, as the order oracle.
fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(x, y) in edges {
        r[x][y] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn perm(orig: &[PortRef], now: &[PortRef]) -> Vec<usize> {
    orig.iter().map(|p| now.iter().position(|q| q == p).expect("same boundary")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn can_signal_is_the_strict_order(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=6);
        // An arbitrary relation, cyclic often enough to exercise both outcomes.
        let edges: Vec<(usize, usize)> = (0..rng.random_range(0..=10))
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let r = closure(n, &edges);
        let cyclic = (0..n).any(|i| r[i][i]);
        match CausalStructure::from_relation(names.clone(), &edges) {
            Err(CausalError::Cycle(_)) => prop_assert!(cyclic),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(s) => {
                prop_assert!(!cyclic);
                for x in 0..n {
                    prop_assert!(!s.can_signal(&names[x], &names[x]).unwrap());
                    for y in 0..n {
                        let xy = s.can_signal(&names[x], &names[y]).unwrap();
                        prop_assert_eq!(xy, r[x][y]);
                        for z in 0..n {
                            if xy && s.can_signal(&names[y], &names[z]).unwrap() {
                                prop_assert!(s.can_signal(&names[x], &names[z]).unwrap());
                            }
                        }
                    }
                }
                // transitive reduction: no Hasse edge is implied by a longer path
                for (x, y) in s.hasse_edges() {
                    prop_assert!(!(0..n).any(|z| r[x][z] && r[z][y]));
                }
            }
        }
    }

    #[test]
    fn flattened_networks_are_acyclic(seed: u64) {
        let (net, _) = common::random_network(seed, 6);
        let d = causalkit::causal::network_to_diagram(&net).unwrap();
        prop_assert!(d.well_formed().is_empty());
        prop_assert!(d.topological_order(false).is_some());
    }

    /// Any clustering either commutes with flattening or is rejected as
    /// creating a cycle among clusters.
    #[test]
    fn coarse_graining_commutes_with_flattening(seed: u64) {
        let (net, interp) = common::random_network(seed, 5);
        let n = net.processes().len();
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let k = rng.random_range(1..=n);
        let cluster_of: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut used: Vec<usize> = cluster_of.clone();
        used.sort();
        used.dedup();
        // renumber so every cluster is non-empty
        let cluster_of: Vec<usize> = cluster_of.iter().map(|c| used.binary_search(c).unwrap()).collect();
        let names = (0..used.len()).map(|i| format!("c{i}")).collect();
        match net.coarse_grain(&cluster_of, names) {
            Err(CausalError::QuotientCycle { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(coarse) => {
                let fine = net.flatten().unwrap();
                let before = evaluate(&fine.diagram, &interp).unwrap();
                let after = evaluate(&coarse.network.flatten().unwrap().diagram, &interp).unwrap();
                let (ins, outs) = coarse.original_boundary().unwrap();
                let aligned = after.permute_ports(&perm(&fine.inputs, &ins), &perm(&fine.outputs, &outs));
                prop_assert!(aligned.max_abs_diff(&before) <= 1e-12);
            }
        }
    }

    #[test]
    fn diamond_normal_form_is_sound_or_errors(seed: u64) {
        let (net, interp) = common::random_network(seed, 6);
        let n = net.processes().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for x in 0..n {
            match rng.random_range(0..4) {
                0 => a.push(x),
                1 => b.push(x),
                _ => {}
            }
        }
        let s = net.structure();
        let comparable = a.iter().any(|&x| b.iter().any(|&y| s.comparable(x, y)));
        match diamond_normal_form(&net, &a, &b) {
            Ok(dn) => {
                prop_assert!(!comparable, "comparable parties were merged into a diamond");
                // the parts pass the constructor's checks again
                let again = DiamondNetwork::new(dn.bot().clone(), dn.a().clone(), dn.b().clone(), dn.top().clone(), dn.ports());
                prop_assert!(again.is_ok());
                let fine = net.flatten().unwrap();
                let before = evaluate(&fine.diagram, &interp).unwrap();
                let after = evaluate(&dn.to_diagram(), &interp).unwrap();
                let (ins, outs) = dn.origin.clone().unwrap();
                let aligned = after.permute_ports(&perm(&fine.inputs, &ins), &perm(&fine.outputs, &outs));
                prop_assert!(aligned.max_abs_diff(&before) <= 1e-12);
            }
            Err(CausalError::EmptyParty) => prop_assert!(a.is_empty() || b.is_empty()),
            Err(CausalError::PartiesComparable { .. }) => prop_assert!(comparable),
            Err(_) => prop_assert!(!a.is_empty() && !b.is_empty() && !comparable),
        }
    }
}

/// The property above must not hold vacuously. Most random networks leave
/// a port open outside the parties and are rightly refused; 30 of these 200
/// seeds reduce.
#[test]
fn diamond_normal_form_often_succeeds() {
    let mut ok = 0;
    for seed in 0..200u64 {
        let (net, _) = common::random_network(seed, 6);
        let s = net.structure();
        let n = s.len();
        let incomparable = (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).find(|&(x, y)| !s.comparable(x, y));
        if let Some((x, y)) = incomparable {
            ok += usize::from(diamond_normal_form(&net, &[x], &[y]).is_ok());
        }
    }
    assert!(ok >= 20, "only {ok} diamonds formed");
}
