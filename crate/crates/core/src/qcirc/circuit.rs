use std::fmt::Write as _;

use crate::numkit::{ComplexMatrix, C64};

use super::gate::{Gate, GateKind};
use super::{CircuitError, ParseError};

/// Simulation cap on total qubits.
pub const MAX_QUBITS: usize = 12;

/// A verifier circuit `U = U_T ⋯ U_1`.
///
/// Qubits `0..inputs` form the input register, `inputs..qubits` the
/// ancillas (initialized to `|0⟩`). Qubit 0 is measured at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    inputs: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize, inputs: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(CircuitError::QubitCount(qubits));
        }
        if inputs > qubits {
            return Err(CircuitError::Registers { qubits, inputs });
        }
        if gates.is_empty() {
            return Err(CircuitError::Empty);
        }
        for g in &gates {
            if let Some(&t) = g.targets().iter().find(|&&t| t >= qubits) {
                return Err(CircuitError::TargetOutOfRange { target: t, qubits });
            }
        }
        Ok(Self {
            qubits,
            inputs,
            gates,
        })
    }

    /// Total qubits `m`.
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Input-register size `n`.
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Circuit length `T`.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.gates.iter().all(Gate::is_real)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut gates = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let at = |source: CircuitError| ParseError {
                line: line_no,
                source,
            };
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "qubits" => {
                    if header.is_some() {
                        return Err(at(CircuitError::Syntax("duplicate header".into())));
                    }
                    if tokens.len() != 4 || tokens[2] != "inputs" {
                        return Err(at(CircuitError::Syntax(
                            "expected `qubits <m> inputs <n>`".into(),
                        )));
                    }
                    let m = parse_usize(tokens[1]).map_err(at)?;
                    let n = parse_usize(tokens[3]).map_err(at)?;
                    if m == 0 || m > MAX_QUBITS {
                        return Err(at(CircuitError::QubitCount(m)));
                    }
                    if n > m {
                        return Err(at(CircuitError::Registers {
                            qubits: m,
                            inputs: n,
                        }));
                    }
                    header = Some((m, n, line_no));
                }
                "G" | "U" => {
                    let (m, _, _) = header.ok_or_else(|| {
                        at(CircuitError::Syntax("gate before `qubits` header".into()))
                    })?;
                    let gate = if tokens[0] == "G" {
                        parse_named(&tokens[1..])
                    } else {
                        parse_raw(&tokens[1..])
                    }
                    .map_err(at)?;
                    if let Some(&t) = gate.targets().iter().find(|&&t| t >= m) {
                        return Err(at(CircuitError::TargetOutOfRange {
                            target: t,
                            qubits: m,
                        }));
                    }
                    gates.push(gate);
                }
                other => {
                    return Err(at(CircuitError::Syntax(format!(
                        "unrecognized line start `{other}`"
                    ))))
                }
            }
        }
        let (m, n, line) = header.ok_or(ParseError {
            line: 0,
            source: CircuitError::Syntax("missing `qubits <m> inputs <n>` header".into()),
        })?;
        Circuit::new(m, n, gates).map_err(|source| ParseError { line, source })
    }

    /// Text form accepted by [`Circuit::parse`]. Floats are written in the
    /// shortest form that parses back to the same double.
    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {} inputs {}\n", self.qubits, self.inputs);
        for g in &self.gates {
            match g.kind() {
                GateKind::Raw => {
                    let _ = write!(out, "U {}", g.arity());
                    for t in g.targets() {
                        let _ = write!(out, " {t}");
                    }
                    for z in g.matrix().as_slice() {
                        let _ = write!(out, " {:?} {:?}", z.re, z.im);
                    }
                }
                kind => {
                    let _ = write!(out, "G {}", kind.name());
                    for t in g.targets() {
                        let _ = write!(out, " {t}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

fn parse_usize(tok: &str) -> Result<usize, CircuitError> {
    tok.parse()
        .map_err(|_| CircuitError::Syntax(format!("expected a nonnegative integer, found `{tok}`")))
}

fn parse_named(tokens: &[&str]) -> Result<Gate, CircuitError> {
    let (name, rest) = tokens
        .split_first()
        .ok_or_else(|| CircuitError::Syntax("missing gate name".into()))?;
    let kind: GateKind = name.parse()?;
    let targets = rest
        .iter()
        .map(|t| parse_usize(t))
        .collect::<Result<Vec<_>, _>>()?;
    Gate::named(kind, &targets)
}

fn parse_raw(tokens: &[&str]) -> Result<Gate, CircuitError> {
    let (arity_tok, rest) = tokens
        .split_first()
        .ok_or_else(|| CircuitError::Syntax("missing raw-gate arity".into()))?;
    let arity = parse_usize(arity_tok)?;
    if arity == 0 || arity > super::gate::RAW_MAX_ARITY {
        return Err(CircuitError::RawArity(arity));
    }
    let dim = 1usize << arity;
    let expected = arity + 2 * dim * dim;
    if rest.len() != expected {
        return Err(CircuitError::Syntax(format!(
            "raw gate of arity {arity} needs {arity} targets and {} floats, found {} tokens",
            2 * dim * dim,
            rest.len()
        )));
    }
    let targets = rest[..arity]
        .iter()
        .map(|t| parse_usize(t))
        .collect::<Result<Vec<_>, _>>()?;
    let floats = rest[arity..]
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CircuitError::Syntax(format!("bad float `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let entries = floats.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
    let matrix = ComplexMatrix::from_row_major(entries).expect("entry count checked");
    Gate::raw(&targets, matrix)
}
