//! Verifier circuits: representation, text format, simulation, the verifier
//! operator `Ω`, planted instances and realification.

mod circuit;
mod gate;
mod plant;
mod realify;
mod sim;

pub use circuit::{Circuit, MAX_QUBITS};
pub use gate::{Gate, GateKind, RAW_MAX_ARITY, UNITARY_TOL};
pub use plant::{plant_verifier, PlantedVerifier};
pub use realify::realify;
pub use sim::{
    apply_circuit, apply_gate, apply_inverse, embed_gate, omega, omega_for_outcome,
    prefix_unitaries, StateVector,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate} expects {expected} targets, found {found}")]
    Arity {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("raw gates act on 1..={max} qubits, found arity {0}", max = gate::RAW_MAX_ARITY)]
    RawArity(usize),
    #[error("qubit {0} targeted twice")]
    RepeatedTarget(usize),
    #[error("gate matrix is not unitary: max |U†U - 1| = {defect:e}")]
    NotUnitary { defect: f64 },
    #[error("target {target} out of range for {qubits} qubits")]
    TargetOutOfRange { target: usize, qubits: usize },
    #[error("qubit count {0} outside 1..={max}", max = circuit::MAX_QUBITS)]
    QubitCount(usize),
    #[error("input register ({inputs}) larger than the circuit ({qubits} qubits)")]
    Registers { qubits: usize, inputs: usize },
    #[error("a circuit needs at least one gate")]
    Empty,
    #[error("{0}")]
    Syntax(String),
    #[error("state of {state} qubits does not fit a {circuit}-qubit circuit")]
    StateQubits { circuit: usize, state: usize },
    #[error("state length {0} is not a power of two")]
    StateLength(usize),
    #[error("planted verifiers need 1 <= n <= {max}, found {0}", max = gate::RAW_MAX_ARITY - 1)]
    PlantSize(usize),
    #[error("accept dimension {d} exceeds 2^{n}")]
    PlantDimension { d: usize, n: usize },
    #[error("planted eps must lie in [0, 1/4), found {0}")]
    PlantEps(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {source}")]
pub struct ParseError {
    pub line: usize,
    #[source]
    pub source: CircuitError,
}
