//! Counting semantics of a verifier operator: the dimension of the accepting
//! eigenspace under a spectral gap promise, the subspace formulation of the
//! same count, and spectral amplification of the thresholds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numkit::{
    eig_hermitian, inner, ComplexMatrix, NumError, SpectralDecomposition, C64, ONE, ZERO,
};

/// Eigenvalues within this distance of a threshold snap onto it.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BqpError {
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("thresholds must satisfy 0 <= b < a <= 1, found a = {a}, b = {b}")]
    Thresholds { a: f64, b: f64 },
    #[error("operator has dimension {dim}, expected 2^{n}")]
    Dimension { dim: usize, n: usize },
    #[error("eigenvalue {eigenvalue} lies outside [0, 1]")]
    Spectrum { eigenvalue: f64 },
    #[error("gap promise violated: eigenvalue {eigenvalue} lies strictly inside (b, a)")]
    PromiseViolation { eigenvalue: f64 },
    #[error("amplification needs r >= 2 so that the new thresholds are separated, found r = {0}")]
    AmplificationRounds(u32),
    #[error("basis vectors are not orthonormal (Gram defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("bases span {found} dimensions of a {dim}-dimensional space")]
    NotSpanning { found: usize, dim: usize },
}

/// A verifier operator `Ω` on `n` input qubits with thresholds `b < a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct VerifierInstance {
    n: usize,
    a: f64,
    b: f64,
    omega: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    n: usize,
    a: f64,
    b: f64,
    #[serde(default, skip_deserializing)]
    gap: f64,
    omega: ComplexMatrix,
}

impl TryFrom<InstanceJson> for VerifierInstance {
    type Error = BqpError;

    fn try_from(j: InstanceJson) -> Result<Self, BqpError> {
        VerifierInstance::new(j.omega, j.n, j.a, j.b)
    }
}

impl From<VerifierInstance> for InstanceJson {
    fn from(v: VerifierInstance) -> Self {
        Self {
            n: v.n,
            a: v.a,
            b: v.b,
            gap: v.gap(),
            omega: v.omega,
        }
    }
}

impl VerifierInstance {
    pub fn new(omega: ComplexMatrix, n: usize, a: f64, b: f64) -> Result<Self, BqpError> {
        if !(0.0 <= b && b < a && a <= 1.0) {
            return Err(BqpError::Thresholds { a, b });
        }
        if omega.dim() != 1 << n {
            return Err(BqpError::Dimension {
                dim: omega.dim(),
                n,
            });
        }
        Ok(Self { n, a, b, omega })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a − b`.
    pub fn gap(&self) -> f64 {
        self.a - self.b
    }

    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    fn spectrum(&self) -> Result<SpectralDecomposition, BqpError> {
        let d = eig_hermitian(&self.omega)?;
        if let Some(&bad) = d
            .eigenvalues
            .iter()
            .find(|&&l| !(-SNAP_TOL..=1.0 + SNAP_TOL).contains(&l))
        {
            return Err(BqpError::Spectrum { eigenvalue: bad });
        }
        Ok(d)
    }

    fn accepts(&self, l: f64) -> bool {
        l >= self.a - SNAP_TOL
    }

    fn rejects(&self, l: f64) -> bool {
        l <= self.b + SNAP_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub dim_accept: usize,
    /// `λ_{dim 𝒜}` in descending order; `None` when nothing is accepted.
    pub lambda_at: Option<f64>,
    /// `λ_{dim 𝒜 + 1}`; `None` when everything is accepted.
    pub lambda_after: Option<f64>,
    pub promise_ok: bool,
    /// Eigenvalues strictly inside `(b, a)`.
    pub offending: Vec<f64>,
    /// `[#{λ ≥ a}, #{λ > b}]`, the range a grace-interval count may report.
    pub count_range: [usize; 2],
}

pub fn accepting_dimension(v: &VerifierInstance) -> Result<CountReport, BqpError> {
    let spec = v.spectrum()?;
    let mut desc = spec.eigenvalues.clone();
    desc.reverse();
    let dim_accept = desc.iter().filter(|&&l| v.accepts(l)).count();
    let offending: Vec<f64> = desc
        .iter()
        .copied()
        .filter(|&l| !v.accepts(l) && !v.rejects(l))
        .collect();
    let above_b = desc.iter().filter(|&&l| !v.rejects(l)).count();
    Ok(CountReport {
        dim_accept,
        lambda_at: dim_accept.checked_sub(1).map(|k| desc[k]),
        lambda_after: desc.get(dim_accept).copied(),
        promise_ok: offending.is_empty(),
        offending,
        count_range: [dim_accept, above_b],
    })
}

/// Checks that `⟨ψ|Ω|ψ⟩ ≥ a` on `span(basis_a)` and `≤ b` on `span(basis_r)`,
/// where the two bases jointly form an orthonormal basis of the input space.
pub fn check_subspace_promise(
    v: &VerifierInstance,
    basis_a: &[Vec<C64>],
    basis_r: &[Vec<C64>],
) -> Result<bool, BqpError> {
    let dim = v.omega.dim();
    let joint: Vec<&Vec<C64>> = basis_a.iter().chain(basis_r).collect();
    if joint.len() != dim || joint.iter().any(|c| c.len() != dim) {
        return Err(BqpError::NotSpanning {
            found: joint.len(),
            dim,
        });
    }
    let mut defect = 0.0f64;
    for (i, x) in joint.iter().enumerate() {
        for (j, y) in joint.iter().enumerate() {
            let want = if i == j { ONE } else { ZERO };
            defect = defect.max((inner(x, y) - want).norm());
        }
    }
    if defect > SNAP_TOL {
        return Err(BqpError::NotOrthonormal { defect });
    }
    let min_accept = if basis_a.is_empty() {
        f64::INFINITY
    } else {
        eig_hermitian(&v.omega.compress(basis_a))?.min()
    };
    let max_reject = if basis_r.is_empty() {
        f64::NEG_INFINITY
    } else {
        eig_hermitian(&v.omega.compress(basis_r))?.max()
    };
    Ok(min_accept >= v.a - SNAP_TOL && max_reject <= v.b + SNAP_TOL)
}

/// `λ_{dim 𝒜} ≥ a > b ≥ λ_{dim 𝒜 + 1}` with eigenvalues in descending order.
///
/// The max–min characterization is checked as well: the span of the top
/// `dim 𝒜` eigenvectors attains `min ⟨ψ|Ω|ψ⟩ = λ_{dim 𝒜}`.
pub fn minimax_certify(v: &VerifierInstance) -> Result<bool, BqpError> {
    let report = accepting_dimension(v)?;
    if let Some(&eigenvalue) = report.offending.first() {
        return Err(BqpError::PromiseViolation { eigenvalue });
    }
    let upper = report.lambda_at.is_none_or(|l| l >= v.a - SNAP_TOL);
    let lower = report.lambda_after.is_none_or(|l| l <= v.b + SNAP_TOL);
    let attained = match report.lambda_at {
        None => true,
        Some(l) => {
            let spec = v.spectrum()?;
            let dim = spec.dim();
            let top: Vec<Vec<C64>> = (dim - report.dim_accept..dim)
                .map(|k| spec.vector(k))
                .collect();
            let compressed_min = eig_hermitian(&v.omega.compress(&top))?.min();
            (compressed_min - l).abs() <= SNAP_TOL
        }
    };
    Ok(upper && lower && attained)
}

/// Piecewise-linear monotone map sending `[a, 1] → [1 − 2^{-r}, 1]` and
/// `[0, b] → [0, 2^{-r}]`, applied to the spectrum of `Ω`.
pub fn amplify_spectrum(v: &VerifierInstance, r: u32) -> Result<VerifierInstance, BqpError> {
    if r < 2 {
        return Err(BqpError::AmplificationRounds(r));
    }
    let report = accepting_dimension(v)?;
    if let Some(&eigenvalue) = report.offending.first() {
        return Err(BqpError::PromiseViolation { eigenvalue });
    }
    let tail = 0.5f64.powi(r as i32);
    let (a, b) = (v.a, v.b);
    let phi = |l: f64| {
        if l >= a - SNAP_TOL {
            let frac = if a < 1.0 {
                ((1.0 - l) / (1.0 - a)).clamp(0.0, 1.0)
            } else {
                0.0
            };
            1.0 - tail * frac
        } else {
            let frac = if b > 0.0 {
                (l / b).clamp(0.0, 1.0)
            } else {
                0.0
            };
            tail * frac
        }
    };
    let omega = v.spectrum()?.apply(phi);
    VerifierInstance::new(omega, v.n, 1.0 - tail, tail)
}

/// Orthonormal vectors spanning a subspace.
pub type Basis = Vec<Vec<C64>>;

/// Orthonormal eigenbases of the accepting and rejecting eigenspaces.
pub fn eigen_split(v: &VerifierInstance) -> Result<(Basis, Basis), BqpError> {
    let spec = v.spectrum()?;
    let accept = spec.vectors_where(|l| v.accepts(l));
    let reject = spec.vectors_where(|l| !v.accepts(l));
    Ok((accept, reject))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::random::{random_orthonormal_columns, random_unitary, seeded};
    use crate::qcirc::{omega, plant_verifier};

    fn planted(n: usize, d: usize, eps: f64, seed: u64, a: f64, b: f64) -> VerifierInstance {
        let p = plant_verifier(n, d, 0, eps, seed).unwrap();
        VerifierInstance::new(omega(&p.circuit), n, a, b).unwrap()
    }

    #[test]
    fn zero_operator_accepts_nothing() {
        let v = VerifierInstance::new(ComplexMatrix::zeros(4), 2, 2.0 / 3.0, 1.0 / 3.0).unwrap();
        let r = accepting_dimension(&v).unwrap();
        assert_eq!(r.dim_accept, 0);
        assert!(r.promise_ok);
        assert_eq!(r.lambda_at, None);
        assert_eq!(r.lambda_after, Some(0.0));
    }

    #[test]
    fn identity_accepts_everything() {
        let v = VerifierInstance::new(ComplexMatrix::identity(4), 2, 2.0 / 3.0, 1.0 / 3.0).unwrap();
        let r = accepting_dimension(&v).unwrap();
        assert_eq!(r.dim_accept, 4);
        assert_eq!(r.lambda_after, None);
    }

    #[test]
    fn planted_count_with_eps() {
        let eps = 2f64.powi(-10);
        let v = planted(3, 5, eps, 7, 1.0 - 2f64.powi(-8), 2f64.powi(-8));
        assert_eq!(accepting_dimension(&v).unwrap().dim_accept, 5);
    }

    #[test]
    fn thresholds_snap_to_boundary() {
        let eps = 2f64.powi(-10);
        let v = planted(2, 3, eps, 1, 1.0 - eps, eps);
        let r = accepting_dimension(&v).unwrap();
        assert_eq!(r.dim_accept, 3);
        assert!(r.promise_ok);
    }

    #[test]
    fn promise_violation_reported() {
        let v = VerifierInstance::new(ComplexMatrix::diagonal(&[1.0, 0.5, 0.0, 0.0]), 2, 0.9, 0.1)
            .unwrap();
        let r = accepting_dimension(&v).unwrap();
        assert!(!r.promise_ok);
        assert_eq!(r.offending, vec![0.5]);
        assert_eq!(r.count_range, [1, 2]);
        assert_eq!(
            minimax_certify(&v),
            Err(BqpError::PromiseViolation { eigenvalue: 0.5 })
        );
    }

    #[test]
    fn invalid_thresholds_rejected() {
        assert!(VerifierInstance::new(ComplexMatrix::zeros(2), 1, 0.5, 0.5).is_err());
        assert!(VerifierInstance::new(ComplexMatrix::zeros(2), 1, 1.5, 0.5).is_err());
        assert!(VerifierInstance::new(ComplexMatrix::zeros(2), 2, 0.7, 0.3).is_err());
    }

    #[test]
    fn subspace_promise_eigenbasis_and_swapped() {
        let v = planted(3, 3, 0.01, 4, 0.9, 0.1);
        let (acc, rej) = eigen_split(&v).unwrap();
        assert!(check_subspace_promise(&v, &acc, &rej).unwrap());
        assert!(!check_subspace_promise(&v, &rej, &acc).unwrap());
    }

    #[test]
    fn subspace_promise_invariant_under_rotation_inside_subspace() {
        let v = planted(3, 5, 0.0, 9, 0.75, 0.25);
        let (acc, rej) = eigen_split(&v).unwrap();
        let mut rng = seeded(3);
        for _ in 0..10 {
            let u = random_unitary(&mut rng, acc.len());
            let mixed: Vec<Vec<C64>> = (0..acc.len())
                .map(|j| {
                    (0..8)
                        .map(|x| (0..acc.len()).map(|k| acc[k][x] * u[(k, j)]).sum())
                        .collect()
                })
                .collect();
            assert!(check_subspace_promise(&v, &mixed, &rej).unwrap());
        }
    }

    #[test]
    fn subspace_promise_rejects_bad_bases() {
        let v = planted(2, 2, 0.0, 1, 0.75, 0.25);
        let (acc, _) = eigen_split(&v).unwrap();
        assert!(matches!(
            check_subspace_promise(&v, &acc, &[]),
            Err(BqpError::NotSpanning { .. })
        ));
        let dup = vec![
            acc[0].clone(),
            acc[0].clone(),
            acc[1].clone(),
            acc[1].clone(),
        ];
        assert!(matches!(
            check_subspace_promise(&v, &dup, &[]),
            Err(BqpError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn generic_split_agrees_with_count() {
        // Any basis pair passing the check has exactly dim 𝒜 accepting columns.
        let v = planted(3, 3, 0.0, 2, 0.75, 0.25);
        let mut rng = seeded(5);
        for k in 0..=8 {
            let cols = random_orthonormal_columns(&mut rng, 8, 8);
            let (a, r) = cols.split_at(k);
            if check_subspace_promise(&v, a, r).unwrap() {
                assert_eq!(k, 3);
            }
        }
        let (acc, rej) = eigen_split(&v).unwrap();
        assert_eq!(acc.len(), accepting_dimension(&v).unwrap().dim_accept);
        assert!(check_subspace_promise(&v, &acc, &rej).unwrap());
    }

    #[test]
    fn minimax_on_two_point_spectrum() {
        let v = planted(2, 2, 0.0, 3, 0.75, 0.25);
        assert!(minimax_certify(&v).unwrap());
        let r = accepting_dimension(&v).unwrap();
        assert!((r.lambda_at.unwrap() - 1.0).abs() < 1e-12);
        assert!(r.lambda_after.unwrap().abs() < 1e-12);
    }

    #[test]
    fn amplification_moves_eigenvalues() {
        let v = planted(2, 3, 0.125, 6, 0.75, 0.25);
        let amp = amplify_spectrum(&v, 10).unwrap();
        let r = accepting_dimension(&amp).unwrap();
        assert_eq!(r.dim_accept, 3);
        assert!(r.lambda_at.unwrap() >= 1.0 - 2f64.powi(-10) - 1e-12);
        assert!(r.lambda_after.unwrap() <= 2f64.powi(-10) + 1e-12);
        // eigenvectors preserved: both operators commute
        let c = &(amp.omega() * v.omega()) - &(v.omega() * amp.omega());
        assert!(c.max_abs() < 1e-9);
    }

    #[test]
    fn amplification_of_projector_only_moves_endpoints() {
        let v = planted(2, 1, 0.0, 1, 0.75, 0.25);
        let amp = amplify_spectrum(&v, 4).unwrap();
        assert!(amp.omega().max_diff(v.omega()) < 1e-12);
        assert_eq!(amp.a(), 1.0 - 1.0 / 16.0);
    }

    #[test]
    fn amplification_needs_two_rounds() {
        let v = planted(2, 1, 0.0, 1, 0.75, 0.25);
        assert_eq!(
            amplify_spectrum(&v, 1).unwrap_err(),
            BqpError::AmplificationRounds(1)
        );
        assert!(amplify_spectrum(&v, 2).is_ok());
    }

    #[test]
    fn json_round_trip_recomputes_gap() {
        let v = planted(1, 1, 0.0, 1, 0.75, 0.25);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"gap\":0.5"));
        let back: VerifierInstance = serde_json::from_str(&s).unwrap();
        assert_eq!(back.omega(), v.omega());
        let bad = s.replace("\"a\":0.75", "\"a\":0.2");
        assert!(serde_json::from_str::<VerifierInstance>(&bad).is_err());
    }
}
