use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::numkit::{ComplexMatrix, C64};

use super::CircuitError;

/// Raw unitaries may act on at most this many qubits.
pub const RAW_MAX_ARITY: usize = 6;

/// Unitarity tolerance for gate matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Swap,
    Raw,
}

impl GateKind {
    pub const NAMED: [GateKind; 10] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::T,
        GateKind::Cnot,
        GateKind::Cz,
        GateKind::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Raw => "U",
        }
    }

    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => Some(2),
            GateKind::Raw => None,
            _ => Some(1),
        }
    }

    /// Matrix in the gate's local basis: bit `k` of the local index is the
    /// state of `targets[k]`. For `CNOT` the first target is the control.
    pub fn matrix(self) -> Option<ComplexMatrix> {
        let r = |x: f64| C64::new(x, 0.0);
        let z = r(0.0);
        let o = r(1.0);
        let h = r(FRAC_1_SQRT_2);
        let m = match self {
            GateKind::I => vec![o, z, z, o],
            GateKind::X => vec![z, o, o, z],
            GateKind::Y => vec![z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z],
            GateKind::Z => vec![o, z, z, -o],
            GateKind::H => vec![h, h, h, -h],
            GateKind::S => vec![o, z, z, C64::new(0.0, 1.0)],
            GateKind::T => vec![o, z, z, C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)],
            GateKind::Cnot => permutation(&[0, 3, 2, 1]),
            GateKind::Cz => vec![o, z, z, z, z, o, z, z, z, z, o, z, z, z, z, -o],
            GateKind::Swap => permutation(&[0, 2, 1, 3]),
            GateKind::Raw => return None,
        };
        Some(ComplexMatrix::from_row_major(m).expect("square by construction"))
    }
}

/// Row-major permutation matrix sending basis `j` to `image[j]`.
fn permutation(image: &[usize]) -> Vec<C64> {
    let d = image.len();
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    for (j, &i) in image.iter().enumerate() {
        m[i * d + j] = C64::new(1.0, 0.0);
    }
    m
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, CircuitError> {
        GateKind::NAMED
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CircuitError::UnknownGate(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: ComplexMatrix,
}

impl Gate {
    pub fn named(kind: GateKind, targets: &[usize]) -> Result<Self, CircuitError> {
        let matrix = kind
            .matrix()
            .ok_or_else(|| CircuitError::UnknownGate(kind.name().to_string()))?;
        let want = kind.arity().unwrap_or(0);
        if targets.len() != want {
            return Err(CircuitError::Arity {
                gate: kind.name().to_string(),
                expected: want,
                found: targets.len(),
            });
        }
        check_distinct(targets)?;
        Ok(Self {
            kind,
            targets: targets.to_vec(),
            matrix,
        })
    }

    pub fn raw(targets: &[usize], matrix: ComplexMatrix) -> Result<Self, CircuitError> {
        let arity = targets.len();
        if arity == 0 || arity > RAW_MAX_ARITY {
            return Err(CircuitError::RawArity(arity));
        }
        if matrix.dim() != 1 << arity {
            return Err(CircuitError::Arity {
                gate: "U".into(),
                expected: arity,
                found: matrix.dim().trailing_zeros() as usize,
            });
        }
        check_distinct(targets)?;
        let defect = matrix.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(CircuitError::NotUnitary { defect });
        }
        Ok(Self {
            kind: GateKind::Raw,
            targets: targets.to_vec(),
            matrix,
        })
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn is_real(&self) -> bool {
        self.matrix.max_imag() == 0.0
    }

    pub fn adjoint(&self) -> Self {
        Self {
            kind: GateKind::Raw,
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Same operator with targets sorted ascending and the matrix permuted to match.
    pub fn sorted(&self) -> (Vec<usize>, ComplexMatrix) {
        let k = self.arity();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&b| self.targets[b]);
        let sites: Vec<usize> = order.iter().map(|&b| self.targets[b]).collect();
        // local bit `s` of the sorted index corresponds to original bit `order[s]`.
        let remap = |idx: usize| {
            let mut out = 0;
            for (s, &b) in order.iter().enumerate() {
                if idx >> s & 1 == 1 {
                    out |= 1 << b;
                }
            }
            out
        };
        let m = ComplexMatrix::from_fn(1 << k, |i, j| self.matrix[(remap(i), remap(j))]);
        (sites, m)
    }
}

fn check_distinct(targets: &[usize]) -> Result<(), CircuitError> {
    for (i, t) in targets.iter().enumerate() {
        if targets[..i].contains(t) {
            return Err(CircuitError::RepeatedTarget(*t));
        }
    }
    Ok(())
}
