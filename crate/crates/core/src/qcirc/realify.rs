use crate::numkit::{ComplexMatrix, C64};

use super::circuit::Circuit;
use super::gate::Gate;
use super::CircuitError;

/// Rewrites a circuit with real gate matrices on one extra qubit.
///
/// An amplitude `a + bi` is stored as `a|r=0⟩ + b|r=1⟩` on the new highest
/// qubit `r`, which joins the ancilla register. A complex gate `A + iB`
/// becomes the real orthogonal `[[A, −B], [B, A]]` on its targets plus `r`;
/// real gates are kept as they are. The diagonal of `Ω` and hence `tr Ω`
/// are unchanged.
pub fn realify(c: &Circuit) -> Result<Circuit, CircuitError> {
    let r = c.qubits();
    let gates = c
        .gates()
        .iter()
        .map(|g| {
            if g.is_real() {
                return Ok(g.clone());
            }
            let m = g.matrix();
            let local = m.dim();
            let doubled = ComplexMatrix::from_fn(2 * local, |i, j| {
                let z = m[(i % local, j % local)];
                let v = match (i / local, j / local) {
                    (0, 0) | (1, 1) => z.re,
                    (0, 1) => -z.im,
                    _ => z.im,
                };
                C64::new(v, 0.0)
            });
            let mut targets = g.targets().to_vec();
            targets.push(r);
            Gate::raw(&targets, doubled)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Circuit::new(c.qubits() + 1, c.inputs(), gates)
}
