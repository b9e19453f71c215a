//! Path-integral evaluation of `tr Ω` and its reduction to counting.
//!
//! A path `ζ` is a forward history `i_0, …, i_T` together with a backward
//! interior `j_1, …, j_{T−1}`, where `j_0 = i_0` and `j_T = i_T`. For a
//! circuit with real gates
//!
//! ```text
//! f(ζ) = P(i_T) · Π_t ⟨i_t|U_t|i_{t−1}⟩ · Π_t ⟨j_t|U_t|j_{t−1}⟩
//! ```
//!
//! and `Σ_ζ f(ζ) = tr Ω`. Each `f` is mapped to the integer
//! `g(ζ) = round(2^k (f(ζ) + 1))` with `k = |ζ| + 2`, and `N = Σ_ζ g(ζ)`
//! recovers the trace as `2^{−k} N − #paths` up to `#paths · 2^{−k−1} ≤ 1/8`.
//!
//! Paths through a zero transition are never enumerated; each contributes
//! exactly `g = 2^k`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::bqpcount::{accepting_dimension, amplify_spectrum, BqpError, VerifierInstance};
use crate::qcirc::{omega_for_outcome, realify, Circuit, CircuitError, Gate};

/// Default bound on the number of evaluated (nonzero-transition) paths.
pub const DEFAULT_PATH_CAP: u64 = 100_000_000;
/// Environment variable overriding [`DEFAULT_PATH_CAP`].
pub const PATH_CAP_ENV: &str = "DOSLAB_PATH_CAP";
/// Dyadic precision accepted by the exact-rational mode: entries are
/// integers over `2^32`.
pub const DYADIC_BITS: u32 = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Bqp(#[from] BqpError),
    #[error("gate {0} has complex entries; realify the circuit first")]
    NotReal(usize),
    #[error("path has {found} forward indices, expected {expected}")]
    PathShape { expected: usize, found: usize },
    #[error("path index {0} is out of range or starts with nonzero ancillas")]
    PathIndex(usize),
    #[error("f = {0} lies outside [-1, 1]")]
    Amplitude(f64),
    #[error("{required} nonzero paths exceed the cap of {cap}; raise {PATH_CAP_ENV} to at least {required}")]
    PathCap { required: u128, cap: u64 },
    #[error("gate {0} has an entry that is not an integer multiple of 2^-{DYADIC_BITS}")]
    NotDyadic(usize),
    #[error("accept bit must be 0 or 1, found {0}")]
    AcceptBit(usize),
}

/// One path `ζ`: `i` holds `i_0..=i_T`, `j` holds `j_1..j_{T−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

/// `|ζ| = n + 2T·m`: the input index `i_0`, then `i_1..i_T` and `j_1..j_T`
/// at `m` bits each. `j_T` is pinned to `i_T` but keeps its bits in the
/// count, which only adds precision.
pub fn zeta_bits(c: &Circuit) -> u32 {
    (c.inputs() + 2 * c.len() * c.qubits()) as u32
}

/// `2^{n + (2T−1)m}`: the number of free path assignments.
pub fn path_count(c: &Circuit) -> BigUint {
    BigUint::one() << (c.inputs() + (2 * c.len() - 1) * c.qubits())
}

fn check_real(c: &Circuit) -> Result<(), PathError> {
    match c.gates().iter().position(|g| !g.is_real()) {
        Some(k) => Err(PathError::NotReal(k)),
        None => Ok(()),
    }
}

fn check_accept_bit(bit: usize) -> Result<(), PathError> {
    if bit > 1 {
        return Err(PathError::AcceptBit(bit));
    }
    Ok(())
}

fn target_mask(g: &Gate) -> usize {
    g.targets().iter().fold(0, |m, &t| m | (1 << t))
}

fn local_index(g: &Gate, x: usize) -> usize {
    g.targets()
        .iter()
        .enumerate()
        .fold(0, |l, (k, &t)| l | (((x >> t) & 1) << k))
}

fn scatter(g: &Gate, l: usize) -> usize {
    g.targets()
        .iter()
        .enumerate()
        .fold(0, |x, (k, &t)| x | (((l >> k) & 1) << t))
}

/// `⟨x|U|y⟩` for a gate embedded in the full register.
fn transition(g: &Gate, x: usize, y: usize) -> f64 {
    if (x ^ y) & !target_mask(g) != 0 {
        return 0.0;
    }
    g.matrix()[(local_index(g, x), local_index(g, y))].re
}

/// `f(ζ)` for a real circuit.
pub fn path_amplitude(c: &Circuit, p: &Path, accept_bit: usize) -> Result<f64, PathError> {
    check_real(c)?;
    check_accept_bit(accept_bit)?;
    let t = c.len();
    if p.i.len() != t + 1 || p.j.len() + 1 != t {
        return Err(PathError::PathShape {
            expected: t + 1,
            found: p.i.len(),
        });
    }
    let dim = 1usize << c.qubits();
    if let Some(&bad) = p.i.iter().chain(&p.j).find(|&&x| x >= dim) {
        return Err(PathError::PathIndex(bad));
    }
    if p.i[0] >= 1 << c.inputs() {
        return Err(PathError::PathIndex(p.i[0]));
    }
    if p.i[t] & 1 != accept_bit {
        return Ok(0.0);
    }
    let mut j = Vec::with_capacity(t + 1);
    j.push(p.i[0]);
    j.extend_from_slice(&p.j);
    j.push(p.i[t]);
    let mut f = 1.0;
    for (k, g) in c.gates().iter().enumerate() {
        f *= transition(g, p.i[k + 1], p.i[k]) * transition(g, j[k + 1], j[k]);
        if f == 0.0 {
            break;
        }
    }
    Ok(f)
}

/// Nonzero forward paths from `start`, as `(endpoint, amplitude)` in DFS order.
fn forward_paths(c: &Circuit, start: usize, cap: u64) -> Result<Vec<(usize, f64)>, PathError> {
    let mut layer = vec![(start, 1.0f64)];
    for g in c.gates() {
        let mask = target_mask(g);
        let local = g.matrix().dim();
        let mut next = Vec::with_capacity(layer.len() * 2);
        for &(y, amp) in &layer {
            let ly = local_index(g, y);
            let rest = y & !mask;
            for lx in 0..local {
                let u = g.matrix()[(lx, ly)].re;
                if u != 0.0 {
                    next.push((rest | scatter(g, lx), amp * u));
                }
            }
        }
        if next.len() as u64 > cap {
            return Err(PathError::PathCap {
                required: next.len() as u128,
                cap,
            });
        }
        layer = next;
    }
    Ok(layer)
}

/// Forward-path amplitudes grouped by accepting endpoint, for every input.
type Buckets = Vec<Vec<f64>>;

fn accepting_buckets(c: &Circuit, accept_bit: usize, cap: u64) -> Result<Buckets, PathError> {
    let per_input: Vec<Vec<Vec<f64>>> = (0..1usize << c.inputs())
        .into_par_iter()
        .map(|i0| {
            let mut by_end: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for (e, amp) in forward_paths(c, i0, cap)? {
                if e & 1 == accept_bit {
                    by_end.entry(e).or_default().push(amp);
                }
            }
            Ok(by_end.into_values().collect())
        })
        .collect::<Result<_, PathError>>()?;
    let buckets: Buckets = per_input.into_iter().flatten().collect();
    let evaluated: u128 = buckets.iter().map(|b| (b.len() as u128).pow(2)).sum();
    if evaluated > cap as u128 {
        return Err(PathError::PathCap {
            required: evaluated,
            cap,
        });
    }
    Ok(buckets)
}

/// `Σ_ζ f(ζ)` over all paths; zero-transition paths are skipped.
pub fn enumerate_trace(c: &Circuit, accept_bit: usize, cap: u64) -> Result<f64, PathError> {
    check_real(c)?;
    check_accept_bit(accept_bit)?;
    let buckets = accepting_buckets(c, accept_bit, cap)?;
    Ok(buckets.iter().map(|b| bucket_sum(b)).sum())
}

fn bucket_sum(b: &[f64]) -> f64 {
    b.iter()
        .map(|&p| b.iter().map(|&q| p * q).sum::<f64>())
        .sum()
}

/// `floor(2^k f + ½)` computed exactly from the binary representation of `f`.
fn round_scaled(f: f64, k: u32) -> BigInt {
    if f == 0.0 {
        return BigInt::zero();
    }
    let bits = f.to_bits();
    let negative = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    let mut m = BigInt::from(mant);
    if negative {
        m = -m;
    }
    let s = e + k as i64;
    if s >= 0 {
        return m << s as usize;
    }
    let t = (-s) as usize;
    // `>>` on BigInt rounds toward negative infinity.
    (m + (BigInt::one() << (t - 1))) >> t
}

/// Fast path of [`round_scaled`] for `k ≤ 70`.
fn round_scaled_i128(f: f64, k: u32) -> i128 {
    if f == 0.0 {
        return 0;
    }
    let bits = f.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    let m = if bits >> 63 == 1 { -mant } else { mant };
    let s = e + k as i64;
    if s >= 0 {
        return m << s;
    }
    let t = -s;
    if t >= 60 {
        // |2^k f| < 2^{53-60}, far below ½.
        return 0;
    }
    (m + (1i128 << (t - 1))) >> t
}

const FAST_K: u32 = 70;

fn clamp_unit(f: f64) -> Result<f64, PathError> {
    if !(-1.0 - 1e-9..=1.0 + 1e-9).contains(&f) {
        return Err(PathError::Amplitude(f));
    }
    Ok(f.clamp(-1.0, 1.0))
}

/// `g = round(2^{|ζ|+2}(f + 1))`, rounding halves away from zero.
pub fn integerize(f: f64, zeta_bits: u32) -> Result<BigUint, PathError> {
    let f = clamp_unit(f)?;
    let k = zeta_bits + 2;
    let g = (BigInt::one() << k as usize) + round_scaled(f, k);
    Ok(g.to_biguint().expect("g is nonnegative for f >= -1"))
}

/// The indicator `h(ζ, ξ) = [0 ≤ ξ < g(ζ)]`.
pub fn h_indicator(g: &BigUint, xi: &BigUint) -> bool {
    xi < g
}

/// `h(ζ, ξ)` evaluated from the circuit.
pub fn h(c: &Circuit, p: &Path, xi: &BigUint, accept_bit: usize) -> Result<bool, PathError> {
    let g = integerize(path_amplitude(c, p, accept_bit)?, zeta_bits(c))?;
    Ok(h_indicator(&g, xi))
}

/// `Σ_{evaluated} floor(2^k f + ½)`, accumulated in `i128` when possible.
fn offset_sum(buckets: &Buckets, k: u32) -> Result<BigInt, PathError> {
    let partials: Vec<BigInt> = buckets
        .par_iter()
        .map(|b| {
            let mut big = BigInt::zero();
            let mut small: i128 = 0;
            for &p in b {
                for &q in b {
                    let f = clamp_unit(p * q)?;
                    if k <= FAST_K {
                        let v = round_scaled_i128(f, k);
                        match small.checked_add(v) {
                            Some(s) => small = s,
                            None => {
                                big += small;
                                small = v;
                            }
                        }
                    } else {
                        big += round_scaled(f, k);
                    }
                }
            }
            Ok(big + small)
        })
        .collect::<Result<_, PathError>>()?;
    Ok(partials.into_iter().sum())
}

/// `N = Σ_ζ g(ζ)`.
pub fn count_oracle(c: &Circuit, accept_bit: usize, cap: u64) -> Result<BigUint, PathError> {
    check_real(c)?;
    check_accept_bit(accept_bit)?;
    let buckets = accepting_buckets(c, accept_bit, cap)?;
    let k = zeta_bits(c) + 2;
    let base = BigInt::from(path_count(c)) << k as usize;
    Ok((base + offset_sum(&buckets, k)?)
        .to_biguint()
        .expect("N is a sum of nonnegative terms"))
}

fn serialize_decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Results of the exact-rational shadow computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactShadow {
    /// `Σ f` as a reduced fraction.
    pub trace_fraction: String,
    pub trace: f64,
    /// `N` with `g` rounded from exact `f`.
    #[serde(serialize_with = "serialize_decimal")]
    pub model_count: BigUint,
    pub estimate: f64,
    /// `2^{−k} Σ 2^k(f+1) − #paths = Σ f` holds exactly.
    pub unrounded_identity: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceCountReport {
    pub qubits: usize,
    pub inputs: usize,
    pub length: usize,
    /// The circuit was realified (one extra qubit) before path summation.
    pub realified: bool,
    pub accept_bit: usize,
    pub trace_direct: f64,
    pub trace_pathsum: f64,
    pub zeta_bits: u32,
    #[serde(serialize_with = "serialize_decimal")]
    pub path_count: BigUint,
    pub evaluated_paths: u64,
    #[serde(serialize_with = "serialize_decimal")]
    pub model_count: BigUint,
    /// `2^{−|ζ|−2} N − #paths`.
    pub estimate: f64,
    /// Amplification rounds `r` used for the thresholded count.
    pub rounds: Option<u32>,
    /// `round(tr φ_r(Ω))` after spectral amplification.
    pub dim_estimate: Option<usize>,
    pub dim_accept: Option<usize>,
    pub exact: Option<ExactShadow>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathOptions {
    pub accept_bit: usize,
    pub cap: u64,
    /// Thresholds of the gap promise; enables `dim_estimate`.
    pub thresholds: Option<(f64, f64)>,
    /// Amplification rounds; defaults to `n + 2`.
    pub rounds: Option<u32>,
    pub exact_rational: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self {
            accept_bit: 1,
            cap: DEFAULT_PATH_CAP,
            thresholds: None,
            rounds: None,
            exact_rational: false,
        }
    }
}

/// Path cap from [`PATH_CAP_ENV`], falling back to the default.
pub fn path_cap_from_env() -> Result<u64, String> {
    match std::env::var(PATH_CAP_ENV) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("{PATH_CAP_ENV} must be a nonnegative integer, found `{s}`")),
        Err(_) => Ok(DEFAULT_PATH_CAP),
    }
}

/// Runs the full reduction: realify if needed, enumerate paths, count
/// `N`, and (with thresholds) compare against the amplified spectrum.
pub fn reconstruct(c: &Circuit, opts: &PathOptions) -> Result<TraceCountReport, PathError> {
    check_accept_bit(opts.accept_bit)?;
    let realified = !c.is_real();
    let real = if realified { realify(c)? } else { c.clone() };
    let omega = omega_for_outcome(c, opts.accept_bit);
    let trace_direct = omega.trace().re;

    let buckets = accepting_buckets(&real, opts.accept_bit, opts.cap)?;
    let zb = zeta_bits(&real);
    let k = zb + 2;
    let paths = path_count(&real);
    let evaluated: u64 = buckets.iter().map(|b| (b.len() as u64).pow(2)).sum();
    let offsets = offset_sum(&buckets, k)?;
    let model_count = ((BigInt::from(paths.clone()) << k as usize) + &offsets)
        .to_biguint()
        .expect("N is nonnegative");
    let estimate = unmap(&model_count, &paths, k);

    let (mut dim_estimate, mut dim_accept, mut rounds) = (None, None, None);
    if let Some((a, b)) = opts.thresholds {
        let v = VerifierInstance::new(omega, c.inputs(), a, b)?;
        let r = opts.rounds.unwrap_or(c.inputs() as u32 + 2);
        let amplified = amplify_spectrum(&v, r)?;
        let tr = amplified.omega().trace().re;
        dim_estimate = Some(tr.round().max(0.0) as usize);
        dim_accept = Some(accepting_dimension(&v)?.dim_accept);
        rounds = Some(r);
    }

    let exact = if opts.exact_rational {
        Some(exact_shadow(&real, opts.accept_bit, opts.cap)?)
    } else {
        None
    };

    Ok(TraceCountReport {
        qubits: real.qubits(),
        inputs: real.inputs(),
        length: real.len(),
        realified,
        accept_bit: opts.accept_bit,
        trace_direct,
        trace_pathsum: buckets.iter().map(|b| bucket_sum(b)).sum(),
        zeta_bits: zb,
        path_count: paths,
        evaluated_paths: evaluated,
        model_count,
        estimate,
        rounds,
        dim_estimate,
        dim_accept,
        exact,
    })
}

/// `2^{−k} N − #paths` without cancellation.
fn unmap(n: &BigUint, paths: &BigUint, k: u32) -> f64 {
    let diff = BigInt::from(n.clone()) - (BigInt::from(paths.clone()) << k as usize);
    BigRational::new(diff, BigInt::one() << k as usize)
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn dyadic_entry(v: f64, gate: usize) -> Result<BigInt, PathError> {
    let scaled = v * f64::from(1u32 << 31) * 2.0;
    if scaled.fract() != 0.0 || scaled.abs() > 2f64.powi(DYADIC_BITS as i32) {
        return Err(PathError::NotDyadic(gate));
    }
    Ok(BigInt::from(scaled as i64))
}

/// Exact `f` for circuits whose entries are multiples of `2^-32`:
/// every forward amplitude is an integer over `2^{32T}`.
pub fn exact_shadow(c: &Circuit, accept_bit: usize, cap: u64) -> Result<ExactShadow, PathError> {
    check_real(c)?;
    check_accept_bit(accept_bit)?;
    for (idx, g) in c.gates().iter().enumerate() {
        for z in g.matrix().as_slice() {
            dyadic_entry(z.re, idx)?;
        }
    }
    let t = c.len();
    let denom_bits = 2 * DYADIC_BITS as usize * t;
    let k = zeta_bits(c) + 2;
    let mut sum_num = BigInt::zero();
    let mut offsets = BigInt::zero();
    let mut unrounded = BigInt::zero();
    for i0 in 0..1usize << c.inputs() {
        let mut layer = vec![(i0, BigInt::one())];
        for (idx, g) in c.gates().iter().enumerate() {
            let mask = target_mask(g);
            let mut next = Vec::new();
            for (y, amp) in &layer {
                let ly = local_index(g, *y);
                for lx in 0..g.matrix().dim() {
                    let u = dyadic_entry(g.matrix()[(lx, ly)].re, idx)?;
                    if !u.is_zero() {
                        next.push(((y & !mask) | scatter(g, lx), amp * u));
                    }
                }
            }
            if next.len() as u64 > cap {
                return Err(PathError::PathCap {
                    required: next.len() as u128,
                    cap,
                });
            }
            layer = next;
        }
        let mut by_end: BTreeMap<usize, Vec<BigInt>> = BTreeMap::new();
        for (e, amp) in layer {
            if e & 1 == accept_bit {
                by_end.entry(e).or_default().push(amp);
            }
        }
        for amps in by_end.values() {
            for p in amps {
                for q in amps {
                    // f = p q / 2^{denom_bits}
                    let num = p * q;
                    let scaled = &num << k as usize;
                    offsets += (scaled.clone() + (BigInt::one() << (denom_bits - 1))) >> denom_bits;
                    unrounded += scaled;
                    sum_num += num;
                }
            }
        }
    }
    let denom = BigInt::one() << denom_bits;
    let trace = BigRational::new(sum_num, denom.clone());
    let paths = path_count(c);
    let model_count = ((BigInt::from(paths.clone()) << k as usize) + offsets)
        .to_biguint()
        .expect("N is nonnegative");
    // 2^{-k}(Σ 2^k(f+1)) − #paths with the 2^k f parts kept as exact fractions.
    let unmapped = BigRational::new(unrounded, denom << k as usize);
    Ok(ExactShadow {
        trace_fraction: trace.to_string(),
        trace: trace.to_f64().unwrap_or(f64::NAN),
        estimate: unmap(&model_count, &paths, k),
        model_count,
        unrounded_identity: unmapped == trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::random::{random_orthogonal, seeded};
    use crate::numkit::{ComplexMatrix, C64};
    use crate::qcirc::{omega, plant_verifier, GateKind};
    use rand::Rng;

    fn named(kind: GateKind, t: &[usize]) -> Gate {
        Gate::named(kind, t).unwrap()
    }

    fn random_real_circuit(rng: &mut impl Rng, m: usize, n: usize, t: usize) -> Circuit {
        let gates = (0..t)
            .map(|_| {
                if rng.random_bool(0.5) {
                    let q = rng.random_range(0..m);
                    Gate::raw(&[q], random_orthogonal(rng, 2)).unwrap()
                } else {
                    let a = rng.random_range(0..m);
                    let b = (a + rng.random_range(1..m)) % m;
                    Gate::raw(&[a, b], random_orthogonal(rng, 4)).unwrap()
                }
            })
            .collect();
        Circuit::new(m, n, gates).unwrap()
    }

    #[test]
    fn identity_path_amplitude() {
        let c = Circuit::new(1, 1, vec![named(GateKind::I, &[0]); 2]).unwrap();
        let p = Path {
            i: vec![1, 1, 1],
            j: vec![1],
        };
        assert_eq!(path_amplitude(&c, &p, 1).unwrap(), 1.0);
        let p = Path {
            i: vec![0, 0, 0],
            j: vec![0],
        };
        assert_eq!(path_amplitude(&c, &p, 1).unwrap(), 0.0);
    }

    #[test]
    fn forbidden_transition_is_zero() {
        let c = Circuit::new(1, 1, vec![named(GateKind::X, &[0])]).unwrap();
        let p = Path {
            i: vec![1, 1],
            j: vec![],
        };
        assert_eq!(path_amplitude(&c, &p, 1).unwrap(), 0.0);
        let p = Path {
            i: vec![0, 1],
            j: vec![],
        };
        assert_eq!(path_amplitude(&c, &p, 1).unwrap(), 1.0);
    }

    #[test]
    fn hadamard_paths_by_hand() {
        // f = ⟨i1|H|i0⟩² P(i1) for one step: entries are ±1/√2, so f = ½ or 0.
        let c = Circuit::new(1, 1, vec![named(GateKind::H, &[0])]).unwrap();
        for i0 in 0..2 {
            for i1 in 0..2 {
                let f = path_amplitude(
                    &c,
                    &Path {
                        i: vec![i0, i1],
                        j: vec![],
                    },
                    1,
                )
                .unwrap();
                let want = if i1 == 1 { 0.5 } else { 0.0 };
                assert!((f - want).abs() < 1e-15);
            }
        }
        // two steps: H then H, mixed i/j paths produce -½
        let c = Circuit::new(1, 1, vec![named(GateKind::H, &[0]); 2]).unwrap();
        let f = path_amplitude(
            &c,
            &Path {
                i: vec![0, 1, 1],
                j: vec![0],
            },
            1,
        )
        .unwrap();
        assert!((f + 0.25).abs() < 1e-15);
    }

    #[test]
    fn path_shape_and_range_checks() {
        let c = Circuit::new(2, 1, vec![named(GateKind::I, &[0])]).unwrap();
        assert!(matches!(
            path_amplitude(
                &c,
                &Path {
                    i: vec![0],
                    j: vec![]
                },
                1
            ),
            Err(PathError::PathShape { .. })
        ));
        assert!(matches!(
            path_amplitude(
                &c,
                &Path {
                    i: vec![2, 2],
                    j: vec![]
                },
                1
            ),
            Err(PathError::PathIndex(2))
        ));
        let s = Circuit::new(1, 1, vec![named(GateKind::S, &[0])]).unwrap();
        assert!(matches!(
            path_amplitude(
                &s,
                &Path {
                    i: vec![0, 0],
                    j: vec![]
                },
                1
            ),
            Err(PathError::NotReal(0))
        ));
    }

    #[test]
    fn trace_small_cases() {
        let id = Circuit::new(2, 2, vec![named(GateKind::I, &[0])]).unwrap();
        assert!((enumerate_trace(&id, 1, DEFAULT_PATH_CAP).unwrap() - 2.0).abs() < 1e-15);
        let x = Circuit::new(1, 1, vec![named(GateKind::X, &[0])]).unwrap();
        assert!((enumerate_trace(&x, 1, DEFAULT_PATH_CAP).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn brute_force_enumeration_matches() {
        // Sum path_amplitude over every ζ literally.
        let mut rng = seeded(31);
        let c = random_real_circuit(&mut rng, 2, 1, 2);
        let mut total = 0.0;
        for i0 in 0..2 {
            for i1 in 0..4 {
                for i2 in 0..4 {
                    for j1 in 0..4 {
                        total += path_amplitude(
                            &c,
                            &Path {
                                i: vec![i0, i1, i2],
                                j: vec![j1],
                            },
                            1,
                        )
                        .unwrap();
                    }
                }
            }
        }
        let fast = enumerate_trace(&c, 1, DEFAULT_PATH_CAP).unwrap();
        assert!((total - fast).abs() < 1e-12);
        assert!((fast - omega(&c).trace().re).abs() < 1e-12);
    }

    #[test]
    fn random_trace_matches_omega() {
        let mut rng = seeded(5);
        for _ in 0..10 {
            let c = random_real_circuit(&mut rng, 3, 2, 3);
            let t = enumerate_trace(&c, 1, DEFAULT_PATH_CAP).unwrap();
            assert!((t - omega(&c).trace().re).abs() < 1e-9);
            let t0 = enumerate_trace(&c, 0, DEFAULT_PATH_CAP).unwrap();
            assert!((t + t0 - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn integerize_examples() {
        assert_eq!(integerize(0.5, 2).unwrap(), BigUint::from(24u32));
        assert_eq!(integerize(-1.0, 7).unwrap(), BigUint::zero());
        assert_eq!(integerize(1.0 / 3.0, 4).unwrap(), BigUint::from(85u32));
        assert_eq!(integerize(1.0, 3).unwrap(), BigUint::from(64u32));
        assert!(integerize(1.5, 3).is_err());
    }

    #[test]
    fn integerize_rounds_half_away() {
        // 2^2 (f + 1) = 4.5 at f = 1/8, k = 2
        assert_eq!(integerize(0.125, 0).unwrap(), BigUint::from(5u32));
        // 2^2 (f + 1) = 3.5 at f = -1/8
        assert_eq!(integerize(-0.125, 0).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn fast_and_exact_rounding_agree() {
        let mut rng = seeded(77);
        for _ in 0..5000 {
            let f: f64 = rng.random_range(-1.0..1.0) * 2f64.powi(-rng.random_range(0..40));
            let k = rng.random_range(0..=FAST_K);
            assert_eq!(
                BigInt::from(round_scaled_i128(f, k)),
                round_scaled(f, k),
                "f={f} k={k}"
            );
        }
        assert_eq!(round_scaled_i128(-0.5, 0), 0);
        assert_eq!(round_scaled_i128(0.5, 0), 1);
        assert_eq!(round_scaled_i128(f64::MIN_POSITIVE / 4.0, 3), 0);
    }

    #[test]
    fn zero_trace_circuit_counts_paths_times_base() {
        // Ω = 0: the input is overwritten by a fresh ancilla swapped onto qubit 0.
        let c = Circuit::new(2, 1, vec![named(GateKind::Swap, &[0, 1])]).unwrap();
        assert!(omega(&c).max_abs() < 1e-15);
        let k = zeta_bits(&c) + 2;
        assert_eq!(
            count_oracle(&c, 1, DEFAULT_PATH_CAP).unwrap(),
            path_count(&c) << k as usize
        );
    }

    #[test]
    fn indicator_definition() {
        let c = Circuit::new(1, 1, vec![named(GateKind::H, &[0])]).unwrap();
        let p = Path {
            i: vec![0, 1],
            j: vec![],
        };
        let g = integerize(0.5, zeta_bits(&c)).unwrap();
        let mut rng = seeded(1);
        for _ in 0..200 {
            let xi = BigUint::from(rng.random_range(0u64..(1 << 10)));
            assert_eq!(h(&c, &p, &xi, 1).unwrap(), xi < g);
        }
        assert!(!h(&c, &p, &g, 1).unwrap());
        assert!(h(&c, &p, &(g - 1u32), 1).unwrap());
    }

    #[test]
    fn reconstruct_identity() {
        let c = Circuit::new(2, 2, vec![named(GateKind::I, &[0])]).unwrap();
        let opts = PathOptions {
            thresholds: Some((1.0, 0.0)),
            ..PathOptions::default()
        };
        let r = reconstruct(&c, &opts).unwrap();
        assert!((r.estimate - 2.0).abs() <= 0.25);
        assert_eq!(r.dim_estimate, Some(2));
        assert_eq!(r.zeta_bits, 2 + 2 * 2);
        assert!(!r.realified);
    }

    #[test]
    fn reconstruct_identity_one_qubit() {
        let c = Circuit::new(1, 1, vec![named(GateKind::I, &[0])]).unwrap();
        let r = reconstruct(&c, &PathOptions::default()).unwrap();
        assert!((r.estimate - 1.0).abs() <= 0.25);
    }

    #[test]
    fn reconstruct_planted() {
        let p = plant_verifier(2, 3, 1, 0.0, 11).unwrap();
        let opts = PathOptions {
            thresholds: Some((0.75, 0.25)),
            ..PathOptions::default()
        };
        let r = reconstruct(&p.circuit, &opts).unwrap();
        assert_eq!(r.dim_estimate, Some(3));
        assert_eq!(r.dim_accept, Some(3));
        assert!((r.estimate - 3.0).abs() <= 0.25);
    }

    #[test]
    fn reconstruct_realifies_complex_circuits() {
        let c = Circuit::new(
            2,
            1,
            vec![
                named(GateKind::H, &[0]),
                named(GateKind::T, &[0]),
                named(GateKind::H, &[0]),
            ],
        )
        .unwrap();
        let r = reconstruct(&c, &PathOptions::default()).unwrap();
        assert!(r.realified);
        assert_eq!(r.qubits, 3);
        assert!((r.trace_pathsum - r.trace_direct).abs() < 1e-9);
        assert!((r.estimate - r.trace_direct).abs() <= 0.25);
    }

    #[test]
    fn random_sweep_within_quarter() {
        let mut rng = seeded(2024);
        for _ in 0..10 {
            let c = random_real_circuit(&mut rng, 3, 2, 2);
            let r = reconstruct(&c, &PathOptions::default()).unwrap();
            assert!((r.trace_pathsum - r.trace_direct).abs() < 1e-9);
            assert!((r.estimate - r.trace_direct).abs() <= 0.25);
        }
    }

    #[test]
    fn model_count_independent_of_order() {
        let mut rng = seeded(6);
        let c = random_real_circuit(&mut rng, 3, 2, 2);
        let a = count_oracle(&c, 1, DEFAULT_PATH_CAP).unwrap();
        // Same N when every path is integerized one at a time in lexicographic order.
        let k = zeta_bits(&c);
        let mut total = BigUint::zero();
        for i0 in 0..4 {
            for i1 in 0..8 {
                for i2 in 0..8 {
                    for j1 in 0..8 {
                        let f = path_amplitude(
                            &c,
                            &Path {
                                i: vec![i0, i1, i2],
                                j: vec![j1],
                            },
                            1,
                        )
                        .unwrap();
                        total += integerize(f, k).unwrap();
                    }
                }
            }
        }
        assert_eq!(a, total);
    }

    #[test]
    fn exact_shadow_on_dyadic_circuit() {
        // 2|s⟩⟨s| − 1 with |s⟩ uniform on two qubits has entries ±½.
        let half = ComplexMatrix::from_fn(4, |i, j| {
            let v = if i == j { -0.5 } else { 0.5 };
            C64::new(v, 0.0)
        });
        let gates = vec![
            Gate::raw(&[0, 1], half).unwrap(),
            named(GateKind::Cnot, &[1, 0]),
            named(GateKind::X, &[2]),
        ];
        let c = Circuit::new(3, 2, gates).unwrap();
        let s = exact_shadow(&c, 1, DEFAULT_PATH_CAP).unwrap();
        assert!(s.unrounded_identity);
        assert!((s.trace - omega(&c).trace().re).abs() < 1e-12);
        assert_eq!(
            s.model_count,
            count_oracle(&c, 1, DEFAULT_PATH_CAP).unwrap()
        );
        assert!((s.estimate - s.trace).abs() <= 0.25);
        assert!(!s.trace_fraction.starts_with('-'));
    }

    #[test]
    fn exact_shadow_rejects_hadamard() {
        let c = Circuit::new(1, 1, vec![named(GateKind::H, &[0])]).unwrap();
        assert!(matches!(
            exact_shadow(&c, 1, DEFAULT_PATH_CAP),
            Err(PathError::NotDyadic(0))
        ));
    }

    #[test]
    fn path_cap_reports_requirement() {
        let c = Circuit::new(
            2,
            2,
            vec![named(GateKind::H, &[0]), named(GateKind::H, &[1])],
        )
        .unwrap();
        match enumerate_trace(&c, 1, 3) {
            Err(PathError::PathCap { required, cap: 3 }) => assert!(required > 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(enumerate_trace(&c, 1, 1000).is_ok());
    }

    #[test]
    fn base_count_arithmetic() {
        let c = Circuit::new(1, 1, vec![named(GateKind::I, &[0])]).unwrap();
        // |ζ| = 1 + 2·1·1 = 3, paths = 2^{1+1} = 4, k = 5.
        assert_eq!(zeta_bits(&c), 3);
        assert_eq!(path_count(&c), BigUint::from(4u32));
        // Only i0 = 1 accepts with f = 1 along the single nonzero path pair.
        let n = count_oracle(&c, 1, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(n, BigUint::from(4u32 * 32 + 32));
    }
}
