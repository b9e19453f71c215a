//! Statevector simulation and assembly of the verifier operator.

use rayon::prelude::*;

use crate::numkit::{ComplexMatrix, C64, ONE, ZERO};

use super::circuit::Circuit;
use super::gate::Gate;
use super::CircuitError;

/// Amplitudes over `2^m` basis states; qubit 0 is the least significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[index] = ONE;
        Self { qubits, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self, CircuitError> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(CircuitError::StateLength(len));
        }
        Ok(Self {
            qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        crate::numkit::norm(&self.amplitudes)
    }
}

/// Applies one gate in place by visiting every index whose target bits are
/// clear and mixing the `2^k` amplitudes reachable by setting them.
pub fn apply_gate(amps: &mut [C64], gate: &Gate) {
    let targets = gate.targets();
    let k = targets.len();
    let local = 1usize << k;
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .filter(|(b, _)| l >> b & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect();
    let m = gate.matrix();
    let mut buf_in = vec![ZERO; local];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (l, &off) in offsets.iter().enumerate() {
            buf_in[l] = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = m.row(r);
            amps[base | off] = row.iter().zip(&buf_in).map(|(a, b)| a * b).sum();
        }
    }
}

/// `U_T ⋯ U_1 |s⟩`.
pub fn apply_circuit(c: &Circuit, s: &StateVector) -> Result<StateVector, CircuitError> {
    if s.qubits != c.qubits() {
        return Err(CircuitError::StateQubits {
            circuit: c.qubits(),
            state: s.qubits,
        });
    }
    let mut amps = s.amplitudes.clone();
    for g in c.gates() {
        apply_gate(&mut amps, g);
    }
    Ok(StateVector {
        qubits: s.qubits,
        amplitudes: amps,
    })
}

/// `U_1† ⋯ U_T† |s⟩`.
pub fn apply_inverse(c: &Circuit, amps: &mut [C64]) {
    for g in c.gates().iter().rev() {
        apply_gate(amps, &g.adjoint());
    }
}

/// The gate as a `2^m × 2^m` operator.
pub fn embed_gate(gate: &Gate, qubits: usize) -> ComplexMatrix {
    let dim = 1 << qubits;
    let mut out = ComplexMatrix::zeros(dim);
    for j in 0..dim {
        let mut col = vec![ZERO; dim];
        col[j] = ONE;
        apply_gate(&mut col, gate);
        for (i, z) in col.into_iter().enumerate() {
            out[(i, j)] = z;
        }
    }
    out
}

/// `U_t ⋯ U_1` for `t = 0..=T` (index 0 is the identity).
pub fn prefix_unitaries(c: &Circuit) -> Vec<ComplexMatrix> {
    let dim = 1 << c.qubits();
    let mut out = Vec::with_capacity(c.len() + 1);
    let mut acc = ComplexMatrix::identity(dim);
    out.push(acc.clone());
    for g in c.gates() {
        acc = &embed_gate(g, c.qubits()) * &acc;
        out.push(acc.clone());
    }
    out
}

/// The verifier operator with the accepting outcome `|1⟩` on qubit 0.
pub fn omega(c: &Circuit) -> ComplexMatrix {
    omega_for_outcome(c, 1)
}

/// `Ω = (1 ⊗ ⟨0|_A) U† (|b⟩⟨b|_0 ⊗ 1) U (1 ⊗ |0⟩_A)` for accept bit `b`.
///
/// Column `j` is obtained by running `U` on `|j⟩_I|0⟩_A`, projecting qubit 0
/// onto `|b⟩` and running `U†` back; its input-register amplitudes are
/// `Ω_{·j}`. Columns are independent and are computed in parallel.
pub fn omega_for_outcome(c: &Circuit, accept_bit: usize) -> ComplexMatrix {
    let n_in = 1usize << c.inputs();
    let columns: Vec<Vec<C64>> = (0..n_in)
        .into_par_iter()
        .map(|j| {
            let mut amps = vec![ZERO; 1 << c.qubits()];
            amps[j] = ONE;
            for g in c.gates() {
                apply_gate(&mut amps, g);
            }
            for (x, z) in amps.iter_mut().enumerate() {
                if x & 1 != accept_bit {
                    *z = ZERO;
                }
            }
            apply_inverse(c, &mut amps);
            amps.truncate(n_in);
            amps
        })
        .collect();
    ComplexMatrix::from_fn(n_in, |i, j| columns[j][i])
}
