//! Few-body Hamiltonians on mixed-dimension sites, exact spectral counting,
//! and the quadratic shift that turns an energy window into a verifier.
//!
//! Sites are ordered little-endian: site 0 is the least significant digit of
//! the basis index, and a term's local matrix uses the same ordering over its
//! (sorted) support.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bqpcount::{BqpError, VerifierInstance};
use crate::numkit::{eigvalsh, hermitian_norm, ComplexMatrix, NumError, C64, HERMITIAN_TOL, ZERO};

/// Largest total dimension assembled densely.
pub const MAX_DIM: usize = 4096;
/// Eigenvalues this close to a window edge are treated as lying on it.
pub const EDGE_TOL: f64 = 1e-9;
/// Default number of histogram bins.
pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error(transparent)]
    Bqp(#[from] BqpError),
    #[error("site dimensions must be positive")]
    SiteDim,
    #[error("term {term}: {reason}")]
    Term { term: usize, reason: String },
    #[error("total dimension {0} exceeds the dense cap {MAX_DIM}")]
    TooLarge(u128),
    #[error("invalid energy window: need e1 < e2 and 0 < delta < e2 - e1, found e1 = {e1}, e2 = {e2}, delta = {delta}")]
    Query { e1: f64, e2: f64, delta: f64 },
    #[error("eigenvalues inside the grace intervals: {0:?}")]
    GraceViolation(Vec<f64>),
    #[error("energies must satisfy e0 < e1 < e2, found {e0}, {e1}, {e2}")]
    GroundEnergies { e0: f64, e1: f64, e2: f64 },
    #[error("eigenvalue {0} lies below e0")]
    BelowGround(f64),
    #[error("eigenvalue {0} lies inside the spectral gap (e1, e2)")]
    InsideGap(f64),
    #[error("direct count {direct} disagrees with the window count {via_dos}")]
    Disagreement { direct: usize, via_dos: usize },
}

/// A Hermitian operator acting on a sorted set of sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTerm {
    pub sites: Vec<usize>,
    pub matrix: ComplexMatrix,
}

impl LocalTerm {
    pub fn new(sites: Vec<usize>, matrix: ComplexMatrix) -> Self {
        Self { sites, matrix }
    }
}

/// `H = Σ_i H_i` over sites of the given dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HamiltonianJson")]
pub struct LocalHamiltonian {
    site_dims: Vec<usize>,
    terms: Vec<LocalTerm>,
}

#[derive(Deserialize)]
struct HamiltonianJson {
    site_dims: Vec<usize>,
    terms: Vec<LocalTerm>,
}

impl TryFrom<HamiltonianJson> for LocalHamiltonian {
    type Error = HamError;

    fn try_from(j: HamiltonianJson) -> Result<Self, HamError> {
        LocalHamiltonian::new(j.site_dims, j.terms)
    }
}

impl LocalHamiltonian {
    /// Validates supports, local dimensions and hermiticity of every term.
    pub fn new(site_dims: Vec<usize>, terms: Vec<LocalTerm>) -> Result<Self, HamError> {
        if site_dims.contains(&0) {
            return Err(HamError::SiteDim);
        }
        let total = site_dims
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
            .unwrap_or(u128::MAX);
        if total > MAX_DIM as u128 {
            return Err(HamError::TooLarge(total));
        }
        for (i, t) in terms.iter().enumerate() {
            let bad = |reason: String| HamError::Term { term: i, reason };
            if t.sites.windows(2).any(|w| w[0] >= w[1]) {
                return Err(bad(format!(
                    "sites {:?} are not strictly increasing",
                    t.sites
                )));
            }
            if let Some(&s) = t.sites.iter().find(|&&s| s >= site_dims.len()) {
                return Err(bad(format!("site {s} out of range")));
            }
            let local: usize = t.sites.iter().map(|&s| site_dims[s]).product();
            if t.matrix.dim() != local {
                return Err(bad(format!(
                    "matrix dimension {} does not match support dimension {local}",
                    t.matrix.dim()
                )));
            }
            let scale = t.matrix.max_abs().max(1.0);
            if t.matrix.max_asymmetry() > HERMITIAN_TOL * scale {
                return Err(bad("matrix is not Hermitian".into()));
            }
        }
        Ok(Self { site_dims, terms })
    }

    /// `n` qubits.
    pub fn qubits(n: usize, terms: Vec<LocalTerm>) -> Result<Self, HamError> {
        Self::new(vec![2; n], terms)
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Largest support size.
    pub fn k(&self) -> usize {
        self.terms.iter().map(|t| t.sites.len()).max().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.site_dims.iter().product()
    }

    /// Terms with operator norm above `1 + 1e-9`, as `(index, norm)`.
    pub fn norm_violations(&self) -> Result<Vec<(usize, f64)>, HamError> {
        let mut out = Vec::new();
        for (i, t) in self.terms.iter().enumerate() {
            let nrm = hermitian_norm(&t.matrix)?;
            if nrm > 1.0 + 1e-9 {
                out.push((i, nrm));
            }
        }
        Ok(out)
    }

    /// Dense matrix of `Σ_i H_i`.
    pub fn assemble(&self) -> Result<ComplexMatrix, HamError> {
        for (i, nrm) in self.norm_violations()? {
            log::warn!("term {i} has operator norm {nrm} > 1");
        }
        let mut h = ComplexMatrix::zeros(self.dim());
        for t in &self.terms {
            add_embedded(&mut h, &self.site_dims, &t.sites, &t.matrix, ONE_SCALE);
        }
        Ok(h)
    }

    /// Ascending spectrum of the assembled matrix.
    pub fn spectrum(&self) -> Result<Vec<f64>, HamError> {
        Ok(eigvalsh(&self.assemble()?)?)
    }
}

const ONE_SCALE: f64 = 1.0;

fn strides(site_dims: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(site_dims.len());
    let mut acc = 1;
    for &d in site_dims {
        s.push(acc);
        acc *= d;
    }
    s
}

/// `h += scale · (M on sites ⊗ 1 elsewhere)`.
fn add_embedded(
    h: &mut ComplexMatrix,
    site_dims: &[usize],
    sites: &[usize],
    m: &ComplexMatrix,
    scale: f64,
) {
    let stride = strides(site_dims);
    let local = m.dim();
    // Offsets of every local basis state in the full index.
    let offsets: Vec<usize> = (0..local)
        .map(|mut l| {
            let mut off = 0;
            for &s in sites {
                off += (l % site_dims[s]) * stride[s];
                l /= site_dims[s];
            }
            off
        })
        .collect();
    let local_of = |x: usize| {
        let mut l = 0;
        let mut place = 1;
        for &s in sites {
            l += ((x / stride[s]) % site_dims[s]) * place;
            place *= site_dims[s];
        }
        l
    };
    for x in 0..h.dim() {
        let lx = local_of(x);
        let rest = x - offsets[lx];
        for (ly, &off) in offsets.iter().enumerate() {
            let v = m[(ly, lx)];
            if v != ZERO {
                h[(rest + off, x)] += v * scale;
            }
        }
    }
}

/// Embeds a term onto a larger sorted support within the same site set.
fn widen(site_dims: &[usize], term: &LocalTerm, support: &[usize]) -> ComplexMatrix {
    let sub_dims: Vec<usize> = support.iter().map(|&s| site_dims[s]).collect();
    let positions: Vec<usize> = term
        .sites
        .iter()
        .map(|s| {
            support
                .iter()
                .position(|x| x == s)
                .expect("support contains term sites")
        })
        .collect();
    let mut out = ComplexMatrix::zeros(sub_dims.iter().product());
    add_embedded(&mut out, &sub_dims, &positions, &term.matrix, ONE_SCALE);
    out
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Energy window `[e1, e2]` with grace width `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DosQuery {
    pub e1: f64,
    pub e2: f64,
    pub delta: f64,
}

impl DosQuery {
    pub fn new(e1: f64, e2: f64, delta: f64) -> Result<Self, HamError> {
        let ok = e1.is_finite() && e2.is_finite() && e2 > e1 && delta > 0.0 && delta < e2 - e1;
        if !ok {
            return Err(HamError::Query { e1, e2, delta });
        }
        Ok(Self { e1, e2, delta })
    }

    fn half(&self) -> f64 {
        self.delta / 2.0
    }

    /// Strictly inside a grace interval, beyond the edge tolerance.
    fn in_grace(&self, l: f64) -> bool {
        let h = self.half();
        [self.e1, self.e2]
            .iter()
            .any(|&e| l > e - h + EDGE_TOL && l < e + h - EDGE_TOL)
    }
}

fn count_in(spectrum: &[f64], lo: f64, hi: f64) -> usize {
    spectrum
        .iter()
        .filter(|&&l| l >= lo - EDGE_TOL && l <= hi + EDGE_TOL)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins spanning the spectrum; the last bin is closed.
    pub fn of(spectrum: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let (mut lo, mut hi) = spectrum
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| {
                (a.min(l), b.max(l))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for &l in spectrum {
            let b = (((l - lo) / width).floor() as usize).min(bins - 1);
            counts[b] += 1;
        }
        Self { edges, counts }
    }

    /// `bin_left,bin_right,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!(
                "{:?},{:?},{}\n",
                self.edges[i],
                self.edges[i + 1],
                c
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DosReport {
    pub count: usize,
    pub grace_violations: Vec<f64>,
    /// Present in grace mode: the counts of the inner and outer windows.
    pub count_range: Option<[usize; 2]>,
    pub histogram: Histogram,
}

/// Counts eigenvalues in `[e1, e2]`.
///
/// Strict mode rejects any eigenvalue strictly inside a grace interval
/// `[e ± Δ/2]`; grace mode reports them together with the range of counts a
/// grace-tolerant answer may take.
pub fn count_dos(
    h: &LocalHamiltonian,
    q: &DosQuery,
    grace_mode: bool,
) -> Result<DosReport, HamError> {
    count_dos_spectrum(&h.spectrum()?, q, grace_mode)
}

pub fn count_dos_spectrum(
    spectrum: &[f64],
    q: &DosQuery,
    grace_mode: bool,
) -> Result<DosReport, HamError> {
    let grace_violations: Vec<f64> = spectrum
        .iter()
        .copied()
        .filter(|&l| q.in_grace(l))
        .collect();
    if !grace_mode && !grace_violations.is_empty() {
        return Err(HamError::GraceViolation(grace_violations));
    }
    let h = q.half();
    let count_range = grace_mode.then(|| {
        [
            count_in(spectrum, q.e1 + h, q.e2 - h),
            count_in(spectrum, q.e1 - h, q.e2 + h),
        ]
    });
    Ok(DosReport {
        count: count_in(spectrum, q.e1, q.e2),
        grace_violations,
        count_range,
        histogram: Histogram::of(spectrum, HISTOGRAM_BINS),
    })
}

/// Window query equivalent to a ground-space count with energies `e0 < e1 < e2`.
pub fn ground_query(e0: f64, e1: f64, e2: f64) -> Result<DosQuery, HamError> {
    if !(e0 < e1 && e1 < e2) {
        return Err(HamError::GroundEnergies { e0, e1, e2 });
    }
    let delta = e2 - e1;
    DosQuery::new(e0 - delta / 2.0, e1 + delta / 2.0, delta)
}

/// Dimension of the eigenspace below `e1`, given `λ_min ≥ e0` and no
/// eigenvalue in `(e1, e2)`. Counted directly and through the equivalent
/// window query; the two must agree.
pub fn count_ground(h: &LocalHamiltonian, e0: f64, e1: f64, e2: f64) -> Result<usize, HamError> {
    count_ground_spectrum(&h.spectrum()?, e0, e1, e2)
}

pub fn count_ground_spectrum(
    spectrum: &[f64],
    e0: f64,
    e1: f64,
    e2: f64,
) -> Result<usize, HamError> {
    let q = ground_query(e0, e1, e2)?;
    if let Some(&l) = spectrum.iter().find(|&&l| l < e0 - EDGE_TOL) {
        return Err(HamError::BelowGround(l));
    }
    if let Some(&l) = spectrum
        .iter()
        .find(|&&l| l > e1 + EDGE_TOL && l < e2 - EDGE_TOL)
    {
        return Err(HamError::InsideGap(l));
    }
    let direct = spectrum.iter().filter(|&&l| l <= e1 + EDGE_TOL).count();
    let via_dos = count_dos_spectrum(spectrum, &q, false)?.count;
    if direct != via_dos {
        return Err(HamError::Disagreement { direct, via_dos });
    }
    Ok(direct)
}

/// `H′ = ν(H² − (e1+e2)H + e1e2)` expanded into local terms, with the
/// thresholds that separate the window interior from its exterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedHamiltonian {
    pub h_prime: LocalHamiltonian,
    pub nu: f64,
    /// Number of expanded terms.
    pub m_terms: usize,
    /// Eigenvalues of `H` in `[e1+Δ/2, e2−Δ/2]` map to at most this value.
    pub a_neg: f64,
    /// Eigenvalues of `H` outside `[e1−Δ/2, e2+Δ/2]` map to at least this value.
    pub b_pos: f64,
}

impl ShiftedHamiltonian {
    /// The scalar map applied to each eigenvalue of `H`.
    pub fn map(&self, q: &DosQuery, l: f64) -> f64 {
        self.nu * (l - q.e1) * (l - q.e2)
    }
}

/// Expands `H²` into `H_i²` and `H_iH_j + H_jH_i` (`i < j`) on the union of
/// supports, adds `−(e1+e2)H_i` and the constant `e1e2`, and rescales by
/// `ν = 1 / (m_terms · max unscaled term norm)` so every term has norm at
/// most `1/m_terms`.
pub fn quadratic_shift(h: &LocalHamiltonian, q: &DosQuery) -> Result<ShiftedHamiltonian, HamError> {
    let dims = h.site_dims();
    let terms = h.terms();
    let mut raw: Vec<LocalTerm> = Vec::new();
    for (i, ti) in terms.iter().enumerate() {
        for tj in &terms[i..] {
            let support = union(&ti.sites, &tj.sites);
            let a = widen(dims, ti, &support);
            let b = widen(dims, tj, &support);
            let m = if std::ptr::eq(ti, tj) {
                &a * &a
            } else {
                &(&a * &b) + &(&b * &a)
            };
            raw.push(LocalTerm::new(support, m.hermitian_part()));
        }
    }
    let lin = -(q.e1 + q.e2);
    for t in terms {
        raw.push(LocalTerm::new(t.sites.clone(), t.matrix.scale(lin)));
    }
    raw.push(LocalTerm::new(
        Vec::new(),
        ComplexMatrix::diagonal(&[q.e1 * q.e2]),
    ));

    let mut bound = 1.0f64;
    for t in &raw {
        bound = bound.max(hermitian_norm(&t.matrix)?);
    }
    let m_terms = raw.len();
    let nu = 1.0 / (m_terms as f64 * bound);
    let scaled = raw
        .into_iter()
        .map(|t| LocalTerm::new(t.sites, t.matrix.scale(nu)))
        .collect();
    let half = q.half();
    let width = q.e2 - q.e1;
    Ok(ShiftedHamiltonian {
        h_prime: LocalHamiltonian::new(dims.to_vec(), scaled)?,
        nu,
        m_terms,
        a_neg: -nu * half * (width - half),
        b_pos: nu * half * (width + half),
    })
}

/// Verifier operator of the one-term-sampling test,
/// `Ω = ½(1 − H′/m_terms)`, with thresholds `a = ½ − A/(2m_terms)` and
/// `b = ½ − B/(2m_terms)`.
///
/// Negative energies of `H′` become acceptance probabilities above ½. When
/// the total dimension is not a power of two, `Ω` is padded with zero rows
/// and columns; padded states are rejected with certainty.
pub fn dos_verifier_omega(s: &ShiftedHamiltonian) -> Result<VerifierInstance, HamError> {
    let hp = s.h_prime.assemble()?;
    let dim = hp.dim();
    let n = dim.next_power_of_two().trailing_zeros() as usize;
    let m = s.m_terms.max(1) as f64;
    let mut omega = ComplexMatrix::zeros(1 << n);
    for i in 0..dim {
        for j in 0..dim {
            let id = if i == j { 1.0 } else { 0.0 };
            omega[(i, j)] = (C64::new(id, 0.0) - hp[(i, j)] / m) * 0.5;
        }
    }
    let a = 0.5 - s.a_neg / (2.0 * m);
    let b = 0.5 - s.b_pos / (2.0 * m);
    Ok(VerifierInstance::new(omega, n, a, b)?)
}
