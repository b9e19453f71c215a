//! Simultaneous canonical form of two orthogonal projectors.
//!
//! Any pair `(P, Q)` splits the space into commuting one-dimensional pieces
//! with joint spectrum `(0,0)`, `(0,1)`, `(1,0)` or `(1,1)`, plus two-by-two
//! blocks on which `P = [[1,0],[0,0]]` and `Q` is the rank-one projector onto
//! `(cos θ, sin θ)` for some `θ ∈ (0, π/2)`. On such a block `P − Q` has
//! eigenvalues `±sin θ`.
//!
//! The angles are read off the compression of `Q` onto the range of `P`,
//! whose eigenvalues are `cos² θ_j` on angle blocks, `1` on `(1,1)` pieces
//! and `0` on `(1,0)` pieces.

use serde::{Deserialize, Serialize};

use super::eigen::{eig_hermitian, eigvalsh};
use super::matrix::ComplexMatrix;
use super::NumError;

/// Idempotency and Hermiticity tolerance for projector inputs.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Compressed eigenvalues within this distance of 0 or 1 count as commuting.
const COMMUTING_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutingBlocks {
    /// Joint spectrum `(P, Q) = (0, 0)`.
    pub zero_zero: usize,
    pub zero_one: usize,
    pub one_zero: usize,
    pub one_one: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrincipalAngleReport {
    pub dim: usize,
    pub rank_p: usize,
    pub rank_q: usize,
    pub commuting_block_types: CommutingBlocks,
    /// Ascending, each strictly inside `(0, π/2)`.
    pub angles: Vec<f64>,
}

impl PrincipalAngleReport {
    /// Spectrum of `P − Q` predicted from the canonical form, ascending.
    pub fn predicted_difference_spectrum(&self) -> Vec<f64> {
        let b = &self.commuting_block_types;
        let mut spec = Vec::with_capacity(self.dim);
        spec.extend(std::iter::repeat_n(-1.0, b.zero_one));
        spec.extend(std::iter::repeat_n(1.0, b.one_zero));
        spec.extend(std::iter::repeat_n(0.0, b.zero_zero + b.one_one));
        for &t in &self.angles {
            spec.push(t.sin());
            spec.push(-t.sin());
        }
        spec.sort_by(f64::total_cmp);
        spec
    }

    /// Largest `|sin θ|` over all pieces where `Q` leaves the range of `P`;
    /// a `(0,1)` piece counts as `θ = π/2`.
    pub fn max_sine(&self) -> f64 {
        let from_angles = self.angles.iter().map(|t| t.sin()).fold(0.0, f64::max);
        if self.commuting_block_types.zero_one > 0 {
            1.0
        } else {
            from_angles
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DifferenceBound {
    /// `‖Q(1−P)Q‖`.
    pub epsilon: f64,
    /// Least eigenvalue of `P − Q`.
    pub min_eig: f64,
    /// `min_eig ≥ −√epsilon − 1e-9`.
    pub bound_holds: bool,
}

/// Validates a projector and returns its Hermitian part.
pub fn checked_projector(m: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let asym = m.max_asymmetry();
    if asym > PROJECTOR_TOL {
        return Err(NumError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    let p = m.hermitian_part();
    let defect = (&p * &p).max_diff(&p);
    if defect > PROJECTOR_TOL {
        return Err(NumError::NotIdempotent { defect });
    }
    Ok(p)
}

fn rank_of(p: &ComplexMatrix) -> usize {
    p.trace().re.round() as usize
}

pub fn principal_angles(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
) -> Result<PrincipalAngleReport, NumError> {
    if p.dim() != q.dim() {
        return Err(NumError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    let p = checked_projector(p)?;
    let q = checked_projector(q)?;
    let dim = p.dim();
    let range_p = eig_hermitian(&p)?.vectors_where(|l| l > 0.5);
    let rank_p = range_p.len();
    let rank_q = rank_of(&q);
    let mut blocks = CommutingBlocks::default();
    let mut angles = Vec::new();
    if !range_p.is_empty() {
        for c2 in eigvalsh(&q.compress(&range_p))? {
            if c2 >= 1.0 - COMMUTING_TOL {
                blocks.one_one += 1;
            } else if c2 <= COMMUTING_TOL {
                blocks.one_zero += 1;
            } else {
                angles.push(c2.sqrt().acos());
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    let used_q = blocks.one_one + angles.len();
    blocks.zero_one = rank_q.checked_sub(used_q).ok_or(NumError::RankAccounting {
        rank: rank_q,
        accounted: used_q,
    })?;
    let used = blocks.one_one + blocks.one_zero + blocks.zero_one + 2 * angles.len();
    blocks.zero_zero = dim.checked_sub(used).ok_or(NumError::RankAccounting {
        rank: dim,
        accounted: used,
    })?;
    Ok(PrincipalAngleReport {
        dim,
        rank_p,
        rank_q,
        commuting_block_types: blocks,
        angles,
    })
}

pub fn projector_difference_bound(
    p: &ComplexMatrix,
    q: &ComplexMatrix,
) -> Result<DifferenceBound, NumError> {
    if p.dim() != q.dim() {
        return Err(NumError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    let p = checked_projector(p)?;
    let q = checked_projector(q)?;
    let comp = &ComplexMatrix::identity(p.dim()) - &p;
    let leak = &(&q * &comp) * &q;
    let epsilon = eigvalsh(&leak)?.last().copied().unwrap_or(0.0).max(0.0);
    let min_eig = eigvalsh(&(&p - &q))?[0];
    Ok(DifferenceBound {
        epsilon,
        min_eig,
        bound_holds: min_eig >= -epsilon.sqrt() - 1e-9,
    })
}
