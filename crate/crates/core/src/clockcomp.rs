//! Clock Hamiltonians for verifier circuits.
//!
//! The clock is a single `(T+1)`-level site placed after the `m` qubits, so
//! the basis index of `|x⟩|t⟩` is `x + 2^m · t`. The Hamiltonian is
//!
//! ```text
//! H = H_init + Σ_t H_evol(t) + H_final
//! ```
//!
//! with `H_init = 1_I ⊗ (1 − |0⟩⟨0|_A) ⊗ |0⟩⟨0|_clock`, the positive
//! semidefinite propagation terms
//! `½(1⊗|t⟩⟨t| + 1⊗|t−1⟩⟨t−1| − U_t⊗|t⟩⟨t−1| − U_t†⊗|t−1⟩⟨t|)`, and one
//! of two output terms:
//!
//! * [`FinalVariant::Projector`]: `Π_{U[ℛ]} ⊗ |T⟩⟨T|`, where `U[ℛ]` is the
//!   image of the rejecting eigenspace of `Ω` (with fresh ancillas) under `U`;
//! * [`FinalVariant::Standard`]: `|0⟩⟨0|_0 ⊗ 1 ⊗ |T⟩⟨T|`, the local penalty
//!   for a rejecting output qubit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bqpcount::{accepting_dimension, eigen_split, BqpError, VerifierInstance};
use crate::hamdos::{HamError, LocalHamiltonian, LocalTerm};
use crate::numkit::{eig_hermitian, eigvalsh, ComplexMatrix, NumError, C64, ONE, ZERO};
use crate::qcirc::{apply_gate, omega, prefix_unitaries, Circuit};

/// Eigenvalues at most this far above the ground band edge count as ground.
pub const GROUND_TOL: f64 = 1e-9;
/// Tolerance of the identity `W† H_evol W = 1 ⊗ E`.
pub const BLOCK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Bqp(#[from] BqpError),
    #[error(transparent)]
    Ham(#[from] HamError),
    #[error("verifier violates the gap promise: eigenvalue {0} lies strictly between b and a")]
    Promise(f64),
    #[error("clock Hamiltonian was compiled from a different circuit or thresholds")]
    Mismatch,
    #[error("W† H_evol W deviates from 1 ⊗ E by {0:e}")]
    Evolution(f64),
    #[error("the swap bound compares a projector-variant and a standard-variant Hamiltonian")]
    Variants,
    #[error("unknown final-term variant `{0}` (expected projector or standard)")]
    UnknownVariant(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalVariant {
    Projector,
    Standard,
}

impl fmt::Display for FinalVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FinalVariant::Projector => "projector",
            FinalVariant::Standard => "standard",
        })
    }
}

impl FromStr for FinalVariant {
    type Err = ClockError;

    fn from_str(s: &str) -> Result<Self, ClockError> {
        match s {
            "projector" => Ok(FinalVariant::Projector),
            "standard" => Ok(FinalVariant::Standard),
            other => Err(ClockError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClockHamiltonian {
    matrix: ComplexMatrix,
    local: LocalHamiltonian,
    circuit: Circuit,
    variant: FinalVariant,
    a: f64,
    b: f64,
    dim_accept: usize,
    /// Orthonormal basis of `U[ℛ]` in the `m`-qubit space.
    rejected_images: Vec<Vec<C64>>,
}

/// Metadata written next to the Hamiltonian terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClockInfo {
    pub qubits: usize,
    pub inputs: usize,
    pub length: usize,
    pub variant: FinalVariant,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub dim_accept: usize,
}

#[derive(Serialize)]
struct ClockJson<'a> {
    site_dims: &'a [usize],
    terms: &'a [LocalTerm],
    clock: ClockInfo,
}

impl ClockHamiltonian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn local(&self) -> &LocalHamiltonian {
        &self.local
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn variant(&self) -> FinalVariant {
        self.variant
    }

    pub fn m(&self) -> usize {
        self.circuit.qubits()
    }

    pub fn n(&self) -> usize {
        self.circuit.inputs()
    }

    pub fn t(&self) -> usize {
        self.circuit.len()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `max(1 − a, b)`: the acceptance error of the source verifier.
    pub fn eps(&self) -> f64 {
        (1.0 - self.a).max(self.b)
    }

    pub fn dim_accept(&self) -> usize {
        self.dim_accept
    }

    pub fn info(&self) -> ClockInfo {
        ClockInfo {
            qubits: self.m(),
            inputs: self.n(),
            length: self.t(),
            variant: self.variant,
            a: self.a,
            b: self.b,
            eps: self.eps(),
            dim_accept: self.dim_accept,
        }
    }

    /// Hamiltonian JSON (`site_dims`, `terms`) plus a `clock` metadata block.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ClockJson {
            site_dims: self.local.site_dims(),
            terms: self.local.terms(),
            clock: self.info(),
        })
        .expect("clock Hamiltonian serializes")
    }
}

fn clock_dim(c: &Circuit) -> usize {
    c.len() + 1
}

fn h_init(c: &Circuit) -> Option<LocalTerm> {
    let (n, m) = (c.inputs(), c.qubits());
    if n == m {
        return None;
    }
    let anc = 1usize << (m - n);
    let mut sites: Vec<usize> = (n..m).collect();
    sites.push(m);
    let diag: Vec<f64> = (0..anc * clock_dim(c))
        .map(|l| if l < anc && l != 0 { 1.0 } else { 0.0 })
        .collect();
    Some(LocalTerm::new(sites, ComplexMatrix::diagonal(&diag)))
}

/// Propagation terms `H_evol(t)` for `t = 1..=T`, on the gate's sorted
/// targets plus the clock.
pub fn evolution_terms(c: &Circuit) -> Vec<LocalTerm> {
    let clock = clock_dim(c);
    c.gates()
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let t = idx + 1;
            let (mut sites, u) = g.sorted();
            let k = u.dim();
            let mut h = ComplexMatrix::zeros(k * clock);
            for x in 0..k {
                h[(x + k * t, x + k * t)] += C64::new(0.5, 0.0);
                h[(x + k * (t - 1), x + k * (t - 1))] += C64::new(0.5, 0.0);
                for y in 0..k {
                    h[(x + k * t, y + k * (t - 1))] -= u[(x, y)] * 0.5;
                    h[(y + k * (t - 1), x + k * t)] -= u[(x, y)].conj() * 0.5;
                }
            }
            sites.push(c.qubits());
            LocalTerm::new(sites, h)
        })
        .collect()
}

fn run(c: &Circuit, amps: &mut [C64]) {
    for g in c.gates() {
        apply_gate(amps, g);
    }
}

fn final_term(c: &Circuit, variant: FinalVariant, rejected_images: &[Vec<C64>]) -> LocalTerm {
    let m = c.qubits();
    let clock = clock_dim(c);
    let last = clock - 1;
    match variant {
        FinalVariant::Standard => {
            let diag: Vec<f64> = (0..2 * clock)
                .map(|l| if l == 2 * last { 1.0 } else { 0.0 })
                .collect();
            LocalTerm::new(vec![0, m], ComplexMatrix::diagonal(&diag))
        }
        FinalVariant::Projector => {
            let full = 1usize << m;
            let mut h = ComplexMatrix::zeros(full * clock);
            let off = full * last;
            for chi in rejected_images {
                for i in 0..full {
                    if chi[i] == ZERO {
                        continue;
                    }
                    for j in 0..full {
                        h[(off + i, off + j)] += chi[i] * chi[j].conj();
                    }
                }
            }
            LocalTerm::new((0..=m).collect(), h)
        }
    }
}

/// Builds the clock Hamiltonian of `c` after checking the gap promise of its
/// verifier operator at `(a, b)`.
pub fn compile_clock(
    c: &Circuit,
    variant: FinalVariant,
    a: f64,
    b: f64,
) -> Result<ClockHamiltonian, ClockError> {
    let v = VerifierInstance::new(omega(c), c.inputs(), a, b)?;
    let report = accepting_dimension(&v)?;
    if let Some(&l) = report.offending.first() {
        return Err(ClockError::Promise(l));
    }
    let (_, rejecting) = eigen_split(&v)?;
    let full = 1usize << c.qubits();
    let rejected_images: Vec<Vec<C64>> = rejecting
        .iter()
        .map(|psi| {
            let mut amps = vec![ZERO; full];
            amps[..psi.len()].copy_from_slice(psi);
            run(c, &mut amps);
            amps
        })
        .collect();

    let mut terms: Vec<LocalTerm> = h_init(c).into_iter().collect();
    terms.extend(evolution_terms(c));
    terms.push(final_term(c, variant, &rejected_images));
    let mut site_dims = vec![2; c.qubits()];
    site_dims.push(clock_dim(c));
    let local = LocalHamiltonian::new(site_dims, terms)?;
    let matrix = local.assemble()?;
    Ok(ClockHamiltonian {
        matrix,
        local,
        circuit: c.clone(),
        variant,
        a,
        b,
        dim_accept: report.dim_accept,
        rejected_images,
    })
}

/// Which tridiagonal clock matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hopping {
    /// Free propagation: `½` in both corners.
    E,
    /// Propagation with a unit penalty at the last time step: corner `3/2`.
    EPrime,
}

/// The `(T+1) × (T+1)` hopping matrix.
pub fn hopping_matrix(t: usize, which: Hopping) -> ComplexMatrix {
    let n = t + 1;
    let mut e = ComplexMatrix::zeros(n);
    for i in 0..n {
        let edge = i == 0 || i == t;
        e[(i, i)] = C64::new(if edge && n > 1 { 0.5 } else { 1.0 }, 0.0);
        if i + 1 < n {
            e[(i, i + 1)] = C64::new(-0.5, 0.0);
            e[(i + 1, i)] = C64::new(-0.5, 0.0);
        }
    }
    if which == Hopping::EPrime {
        e[(t, t)] += ONE;
    }
    e
}

/// Closed-form spectrum of [`hopping_matrix`], ascending.
///
/// `E` has eigenvalues `1 − cos(kπ/(T+1))` with cosine eigenvectors. For
/// `E′` the cosine ansatz `v_j = cos((j+½)ϑ)` meets the last row when
/// `v_{T+1} = −v_T`, i.e. `cos((T+1)ϑ) = 0`, giving
/// `1 − cos((k+½)π/(T+1))`.
pub fn hopping_spectrum(t: usize, which: Hopping) -> Vec<f64> {
    let denom = (t + 1) as f64;
    (0..=t)
        .map(|k| {
            let theta = match which {
                Hopping::E => k as f64 * std::f64::consts::PI / denom,
                Hopping::EPrime => (k as f64 + 0.5) * std::f64::consts::PI / denom,
            };
            1.0 - theta.cos()
        })
        .collect()
}

/// `1 − cos(π/(2T+3))`.
pub fn gap_bound(t: usize) -> f64 {
    1.0 - (std::f64::consts::PI / (2 * t + 3) as f64).cos()
}

#[derive(Clone, Debug)]
pub struct BlockDiagonalization {
    /// `W† H W`.
    pub h_prime: ComplexMatrix,
    /// `max |W†W − 1|`.
    pub w_defect: f64,
    /// `max |W† H_evol W − 1 ⊗ E|`.
    pub evolution_defect: f64,
}

/// Conjugates by `W = Σ_j U_j⋯U_1 ⊗ |j⟩⟨j|` and checks that the propagation
/// terms become `1 ⊗ E`.
pub fn block_diagonalize(
    h: &ClockHamiltonian,
    c: &Circuit,
) -> Result<BlockDiagonalization, ClockError> {
    if h.circuit != *c {
        return Err(ClockError::Mismatch);
    }
    let prefixes = prefix_unitaries(c);
    let w_defect = prefixes
        .iter()
        .map(|v| v.unitarity_defect())
        .fold(0.0, f64::max);
    let conj = |m: &ComplexMatrix| conjugate_blocks(m, &prefixes);

    let mut site_dims = vec![2; c.qubits()];
    site_dims.push(clock_dim(c));
    let evol = LocalHamiltonian::new(site_dims, evolution_terms(c))?.assemble()?;
    let e = hopping_matrix(c.len(), Hopping::E);
    let target = e.kron(&ComplexMatrix::identity(1 << c.qubits()));
    let evolution_defect = conj(&evol).max_diff(&target);
    if evolution_defect > BLOCK_TOL {
        return Err(ClockError::Evolution(evolution_defect));
    }
    Ok(BlockDiagonalization {
        h_prime: conj(&h.matrix),
        w_defect,
        evolution_defect,
    })
}

/// Block `(s, t)` of the result is `V_s† M_{st} V_t`.
fn conjugate_blocks(m: &ComplexMatrix, prefixes: &[ComplexMatrix]) -> ComplexMatrix {
    let k = prefixes[0].dim();
    let clocks = prefixes.len();
    let mut out = ComplexMatrix::zeros(m.dim());
    for s in 0..clocks {
        for t in 0..clocks {
            let block = ComplexMatrix::from_fn(k, |i, j| m[(s * k + i, t * k + j)]);
            if block.max_abs() == 0.0 {
                continue;
            }
            let conj = &(&prefixes[s].adjoint() * &block) * &prefixes[t];
            for i in 0..k {
                for j in 0..k {
                    out[(s * k + i, t * k + j)] = conj[(i, j)];
                }
            }
        }
    }
    out
}

/// Orthonormal bases of the three invariant subspaces of `W† H W`.
#[derive(Clone, Debug)]
pub struct SubspaceSplit {
    /// Accepting inputs, fresh ancillas, any clock value.
    pub s1: Vec<Vec<C64>>,
    /// Rejecting inputs, fresh ancillas, any clock value.
    pub s2: Vec<Vec<C64>>,
    /// Ancillas not all zero.
    pub s3: Vec<Vec<C64>>,
}

pub fn subspace_split(h: &ClockHamiltonian) -> Result<SubspaceSplit, ClockError> {
    let c = &h.circuit;
    let v = VerifierInstance::new(omega(c), c.inputs(), h.a, h.b)?;
    let (acc, rej) = eigen_split(&v)?;
    let full = 1usize << c.qubits();
    let dim = full * clock_dim(c);
    let lift = |basis: &[Vec<C64>]| -> Vec<Vec<C64>> {
        let mut out = Vec::new();
        for t in 0..clock_dim(c) {
            for psi in basis {
                let mut x = vec![ZERO; dim];
                x[t * full..t * full + psi.len()].copy_from_slice(psi);
                out.push(x);
            }
        }
        out
    };
    let mut s3 = Vec::new();
    for t in 0..clock_dim(c) {
        for x in (1usize << c.inputs())..full {
            let mut e = vec![ZERO; dim];
            e[t * full + x] = ONE;
            s3.push(e);
        }
    }
    Ok(SubspaceSplit {
        s1: lift(&acc),
        s2: lift(&rej),
        s3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// Largest Frobenius norm of `B_p† H′ B_q` over `p ≠ q`.
    pub off_block_norm: f64,
    pub s1_spectrum: Vec<f64>,
    pub s2_min: Option<f64>,
    pub s3_min: Option<f64>,
}

/// Restrictions of `H′` to the three subspaces and the couplings between them.
pub fn block_report(
    h_prime: &ComplexMatrix,
    split: &SubspaceSplit,
) -> Result<BlockReport, ClockError> {
    let blocks = [&split.s1, &split.s2, &split.s3];
    let hb: Vec<Vec<Vec<C64>>> = blocks
        .iter()
        .map(|b| b.iter().map(|x| h_prime.mul_vec(x)).collect())
        .collect();
    let mut off = 0.0f64;
    for (p, block) in blocks.iter().enumerate() {
        for (q, images) in hb.iter().enumerate() {
            if p == q {
                continue;
            }
            let mut sq = 0.0;
            for x in block.iter() {
                for hy in images {
                    sq += crate::numkit::inner(x, hy).norm_sqr();
                }
            }
            off = off.max(sq.sqrt());
        }
    }
    let restricted = |b: &Vec<Vec<C64>>| -> Result<Option<Vec<f64>>, ClockError> {
        if b.is_empty() {
            return Ok(None);
        }
        Ok(Some(eigvalsh(&h_prime.compress(b))?))
    };
    Ok(BlockReport {
        off_block_norm: off,
        s1_spectrum: restricted(&split.s1)?.unwrap_or_default(),
        s2_min: restricted(&split.s2)?.map(|s| s[0]),
        s3_min: restricted(&split.s3)?.map(|s| s[0]),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundReport {
    pub degeneracy: usize,
    pub expected: usize,
    pub ground_energy: f64,
    /// Width of the ground band; 0 when it is empty.
    pub splitting: f64,
    /// Distance from the top of the ground band to the next eigenvalue, or
    /// the least eigenvalue when the band is empty.
    pub gap: f64,
    pub gap_bound: f64,
    pub cutoff: f64,
    pub ok: bool,
}

/// Counts eigenvalues at or below the cutoff (`1e-9`, plus `eps` for the
/// standard variant) and compares gap and splitting with their bounds.
pub fn analyze_ground_space(
    h: &ClockHamiltonian,
    expected_dim: usize,
) -> Result<GroundReport, ClockError> {
    analyze_spectrum(
        &eigvalsh(&h.matrix)?,
        h.variant,
        h.eps(),
        h.t(),
        expected_dim,
    )
}

pub fn analyze_spectrum(
    spectrum: &[f64],
    variant: FinalVariant,
    eps: f64,
    t: usize,
    expected: usize,
) -> Result<GroundReport, ClockError> {
    let slack = match variant {
        FinalVariant::Projector => 0.0,
        FinalVariant::Standard => eps,
    };
    let cutoff = slack + GROUND_TOL;
    let degeneracy = spectrum.iter().filter(|&&l| l <= cutoff).count();
    let ground_energy = spectrum[0];
    let (splitting, gap) = if degeneracy == 0 {
        (0.0, spectrum[0])
    } else {
        let top = spectrum[degeneracy - 1];
        let next = spectrum.get(degeneracy).map_or(f64::INFINITY, |&l| l - top);
        (top - spectrum[0], next)
    };
    let gap_bound = match variant {
        FinalVariant::Projector => gap_bound(t),
        FinalVariant::Standard => gap_bound(t) - eps.sqrt(),
    };
    let ok = degeneracy == expected && splitting <= cutoff && gap >= gap_bound - GROUND_TOL;
    Ok(GroundReport {
        degeneracy,
        expected,
        ground_energy,
        splitting,
        gap,
        gap_bound,
        cutoff,
        ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapReport {
    /// Least eigenvalue of `H_std − H_proj`.
    pub min_eig_diff: f64,
    pub sqrt_eps: f64,
    pub holds: bool,
    /// `max ⟨χ|(|1⟩⟨1|_0 ⊗ 1)|χ⟩` over unit `χ ∈ U[ℛ]`.
    pub chi_accept_max: f64,
    pub chi_ok: bool,
}

/// Checks `H_final^std ≥ H_final − √eps` on the assembled Hamiltonians and the
/// acceptance bound on `U[ℛ]` behind it.
pub fn final_term_swap_bound(
    h_proj: &ClockHamiltonian,
    h_std: &ClockHamiltonian,
) -> Result<SwapReport, ClockError> {
    if h_proj.variant != FinalVariant::Projector || h_std.variant != FinalVariant::Standard {
        return Err(ClockError::Variants);
    }
    if h_proj.circuit != h_std.circuit || h_proj.a != h_std.a || h_proj.b != h_std.b {
        return Err(ClockError::Mismatch);
    }
    let diff = &h_std.matrix - &h_proj.matrix;
    let min_eig_diff = eig_hermitian(&diff)?.min();
    let eps = h_proj.eps();
    let sqrt_eps = eps.sqrt();
    let chi_accept_max = if h_proj.rejected_images.is_empty() {
        0.0
    } else {
        let dim = 1usize << h_proj.m();
        let accept = ComplexMatrix::diagonal(&(0..dim).map(|x| (x & 1) as f64).collect::<Vec<_>>());
        eig_hermitian(&accept.compress(&h_proj.rejected_images))?.max()
    };
    Ok(SwapReport {
        min_eig_diff,
        sqrt_eps,
        holds: min_eig_diff >= -sqrt_eps - GROUND_TOL,
        chi_accept_max,
        chi_ok: chi_accept_max <= eps + GROUND_TOL,
    })
}
