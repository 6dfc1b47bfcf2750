use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::product;
use super::{Backend, Binding, MapClass, QuantumChannel, StochasticMap};

/// A seeded random map of the requested class.
///
/// * stochastic: positive entries, columns normalised to 1;
/// * substochastic: a stochastic map with each column scaled by an
///   independent factor in `[0.2, 0.9]`;
/// * cptp: a Stinespring isometry from a QR-orthonormalised Gaussian matrix,
///   with the environment traced out.
///
/// In the finstoch backend `cptp` means stochastic; in the quantum backend
/// `stochastic` means CPTP and `substochastic` scales a CPTP channel by one
/// factor in `[0.2, 0.9]`.
pub fn random_generator(
    backend: Backend,
    in_dims: &[usize],
    out_dims: &[usize],
    class: MapClass,
    seed: u64,
) -> Binding {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (din, dout) = (product(in_dims), product(out_dims));
    match backend {
        Backend::FinStoch => {
            let mut m = DMatrix::from_fn(dout, din, |_, _| rng.random::<f64>() + 1e-3);
            for mut col in m.column_iter_mut() {
                let scale = match class {
                    MapClass::Substochastic => rng.random_range(0.2..=0.9),
                    _ => 1.0,
                };
                let s = col.sum();
                col.iter_mut().for_each(|x| *x = *x * scale / s);
            }
            Binding::Stochastic(StochasticMap::new(m).expect("entries are positive"))
        }
        Backend::Quantum => {
            let channel = random_channel(&mut rng, in_dims, out_dims);
            Binding::Channel(match class {
                MapClass::Substochastic => channel.scaled(rng.random_range(0.2..=0.9)),
                _ => channel,
            })
        }
    }
}

fn random_channel(rng: &mut ChaCha8Rng, in_dims: &[usize], out_dims: &[usize]) -> QuantumChannel {
    let (din, dout) = (product(in_dims), product(out_dims));
    let env = din;
    let g = DMatrix::from_fn(dout * env, din, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let v = g.qr().q();
    let kraus: Vec<DMatrix<Complex64>> = (0..env)
        .map(|k| DMatrix::from_fn(dout, din, |o, i| v[(o * env + k, i)]))
        .collect();
    QuantumChannel::from_kraus(&kraus, in_dims.to_vec(), out_dims.to_vec())
        .expect("Kraus shapes follow the dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::channel::{min_eigenvalue, partial_trace_output};
    use crate::semantics::linalg::max_abs_diff;

    #[test]
    fn stochastic_columns_sum_to_one() {
        let Binding::Stochastic(s) = random_generator(Backend::FinStoch, &[2], &[2], MapClass::Stochastic, 7)
        else {
            panic!("finstoch yields stochastic maps")
        };
        for sum in s.column_sums() {
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn substochastic_columns_are_scaled() {
        let Binding::Stochastic(s) =
            random_generator(Backend::FinStoch, &[2], &[2], MapClass::Substochastic, 7)
        else {
            panic!("finstoch yields stochastic maps")
        };
        assert!(s.column_sums().iter().any(|&c| (0.2..=0.9).contains(&c)));
    }

    #[test]
    fn cptp_choi_is_positive_and_trace_preserving() {
        let Binding::Channel(c) = random_generator(Backend::Quantum, &[2], &[2], MapClass::Cptp, 7) else {
            panic!("quantum yields channels")
        };
        // independent of `validate`: eigen-decomposition and partial trace
        assert!(min_eigenvalue(c.choi()) >= -1e-9);
        let pt = partial_trace_output(c.choi(), 2, 2);
        assert!(max_abs_diff(&pt, &DMatrix::identity(2, 2)) <= 1e-9);
    }

    #[test]
    fn seeds_are_deterministic() {
        let a = random_generator(Backend::Quantum, &[2], &[3], MapClass::Cptp, 3);
        let b = random_generator(Backend::Quantum, &[2], &[3], MapClass::Cptp, 3);
        assert_eq!(a, b);
        let c = random_generator(Backend::Quantum, &[2], &[3], MapClass::Cptp, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn states_and_effects() {
        for (i, o) in [(vec![], vec![3]), (vec![3], vec![]), (vec![2, 2], vec![2])] {
            let Binding::Channel(c) = random_generator(Backend::Quantum, &i, &o, MapClass::Cptp, 1) else {
                unreachable!()
            };
            assert!(c.validate(MapClass::Cptp).is_empty(), "{i:?} -> {o:?}");
        }
    }
}
