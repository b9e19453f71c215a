//! Verifier circuits with a prescribed two-point acceptance spectrum.
//!
//! The circuit acts on `n` input qubits plus one ancilla. Its first gate is
//! a single unitary on all `n + 1` qubits that
//!
//! 1. permutes the input basis by a seeded permutation `π`,
//! 2. writes the decision `[π(y) < d]` onto qubit 0 while parking the old
//!    qubit-0 bit in the ancilla, and
//! 3. rotates qubit 0 by the real rotation with `sin²θ = eps`.
//!
//! Distinct inputs end in orthogonal states, so `Ω` is diagonal in the input
//! basis with exactly `d` entries `1 − eps` and `2^n − d` entries `eps`. The
//! remaining `t_pad` gates are identities on seeded qubits.

use rand::Rng;

use crate::numkit::random::{random_permutation, seeded};
use crate::numkit::{ComplexMatrix, C64};

use super::circuit::{Circuit, MAX_QUBITS};
use super::gate::{Gate, GateKind, RAW_MAX_ARITY};
use super::CircuitError;

#[derive(Clone, Debug)]
pub struct PlantedVerifier {
    pub circuit: Circuit,
    pub expected_dim: usize,
    /// Input basis states with acceptance probability `1 − eps`, ascending.
    pub accepted_inputs: Vec<usize>,
    pub eps: f64,
}

pub fn plant_verifier(
    n: usize,
    d: usize,
    t_pad: usize,
    eps: f64,
    seed: u64,
) -> Result<PlantedVerifier, CircuitError> {
    if n == 0 || n + 1 > RAW_MAX_ARITY || n + 1 > MAX_QUBITS {
        return Err(CircuitError::PlantSize(n));
    }
    if d > 1 << n {
        return Err(CircuitError::PlantDimension { d, n });
    }
    if !(0.0..0.25).contains(&eps) {
        return Err(CircuitError::PlantEps(eps));
    }
    let m = n + 1;
    let mut rng = seeded(seed);
    let perm = random_permutation(&mut rng, 1 << n);

    // Image of each m-qubit basis state under the classical part.
    let dim = 1usize << m;
    let mut image = vec![usize::MAX; dim];
    let mut taken = vec![false; dim];
    for y in 0..(1usize << n) {
        let x = perm[y];
        let accept = usize::from(x < d);
        let target = accept | (x & !1 & ((1 << n) - 1)) | ((x & 1) << n);
        image[y] = target;
        taken[target] = true;
    }
    let mut free = (0..dim).filter(|&t| !taken[t]);
    for slot in image.iter_mut().skip(1 << n) {
        *slot = free.next().expect("permutation completes");
    }

    let (c, s) = ((eps.sqrt()).asin().cos(), eps.sqrt());
    // Rotation on qubit 0: |0> -> c|0> + s|1>, |1> -> -s|0> + c|1>.
    let mut core = ComplexMatrix::zeros(dim);
    for (src, &dst) in image.iter().enumerate() {
        let rest = dst & !1;
        if dst & 1 == 0 {
            core[(rest, src)] = C64::new(c, 0.0);
            core[(rest | 1, src)] = C64::new(s, 0.0);
        } else {
            core[(rest, src)] = C64::new(-s, 0.0);
            core[(rest | 1, src)] = C64::new(c, 0.0);
        }
    }
    let targets: Vec<usize> = (0..m).collect();
    let mut gates = vec![Gate::raw(&targets, core)?];
    for _ in 0..t_pad {
        let q = rng.random_range(0..m);
        gates.push(Gate::named(GateKind::I, &[q])?);
    }
    let mut accepted_inputs: Vec<usize> = (0..(1usize << n)).filter(|&y| perm[y] < d).collect();
    accepted_inputs.sort_unstable();
    Ok(PlantedVerifier {
        circuit: Circuit::new(m, n, gates)?,
        expected_dim: d,
        accepted_inputs,
        eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::eigvalsh;
    use crate::qcirc::omega;

    #[test]
    fn empty_and_full_accept_spaces() {
        let zero = plant_verifier(2, 0, 0, 0.0, 1).unwrap();
        assert!(omega(&zero.circuit).max_abs() < 1e-15);
        let full = plant_verifier(2, 4, 0, 0.0, 1).unwrap();
        assert!(omega(&full.circuit).max_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn two_point_spectrum_with_eps() {
        let eps = 2f64.powi(-10);
        let p = plant_verifier(3, 5, 2, eps, 7).unwrap();
        let spec = eigvalsh(&omega(&p.circuit)).unwrap();
        let low = spec.iter().filter(|&&l| (l - eps).abs() <= 1e-9).count();
        let high = spec
            .iter()
            .filter(|&&l| (l - (1.0 - eps)).abs() <= 1e-9)
            .count();
        assert_eq!((low, high), (3, 5));
        assert_eq!(p.circuit.len(), 3);
    }

    #[test]
    fn every_dimension_every_size() {
        for n in 1..=4 {
            for d in 0..=(1 << n) {
                let p = plant_verifier(n, d, 0, 0.0, (n * 31 + d) as u64).unwrap();
                let o = omega(&p.circuit);
                let diag: Vec<f64> = (0..1 << n).map(|i| o[(i, i)].re).collect();
                let accepted: Vec<usize> = (0..1 << n).filter(|&i| diag[i] > 0.5).collect();
                assert_eq!(accepted, p.accepted_inputs);
                assert_eq!(accepted.len(), d);
                assert!(o.max_diff(&ComplexMatrix::diagonal(&diag)) < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = plant_verifier(3, 2, 3, 0.01, 5).unwrap();
        let b = plant_verifier(3, 2, 3, 0.01, 5).unwrap();
        assert_eq!(a.circuit, b.circuit);
        let c = plant_verifier(3, 2, 3, 0.01, 6).unwrap();
        assert_ne!(a.circuit, c.circuit);
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(matches!(
            plant_verifier(2, 5, 0, 0.0, 0),
            Err(CircuitError::PlantDimension { .. })
        ));
        assert!(plant_verifier(2, 1, 0, 0.25, 0).is_err());
        assert!(plant_verifier(0, 0, 0, 0.0, 0).is_err());
    }
}
