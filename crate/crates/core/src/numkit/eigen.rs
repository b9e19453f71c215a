//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so the sweep
//! order and therefore the output are fully deterministic.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::NumError;

/// Accepted Hermiticity defect, relative to `max(1, max |M_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Sweeps stop once the off-diagonal Frobenius mass drops below
/// `OFFDIAG_TOL · dim · max(1, ‖M‖_F)`.
pub const OFFDIAG_TOL: f64 = 1e-13;

const MAX_SWEEPS: usize = 60;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// Eigenvectors whose eigenvalue satisfies `keep`.
    pub fn vectors_where(&self, keep: impl Fn(f64) -> bool) -> Vec<Vec<C64>> {
        (0..self.dim())
            .filter(|&k| keep(self.eigenvalues[k]))
            .map(|k| self.vector(k))
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `Σ φ(λ_k) v_k v_k†`.
    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| phi(l)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * weights[k])
                .sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|l| l)
    }
}

fn hermitian_input(m: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let asym = m.max_asymmetry();
    if asym > HERMITIAN_TOL * m.max_abs().max(1.0) {
        return Err(NumError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    Ok(m.hermitian_part())
}

/// Full eigensystem of a Hermitian matrix, eigenvalues ascending.
///
/// Ties keep the order in which the Jacobi sweep left them on the diagonal.
/// Every eigenvector is rephased so its first nonzero component is real and
/// positive.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralDecomposition, NumError> {
    let mut a = hermitian_input(m)?;
    let n = a.dim();
    let mut v = ComplexMatrix::identity(n);
    jacobi(&mut a, Some(&mut v))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));

    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        fix_phase(&mut col);
        for (i, z) in col.into_iter().enumerate() {
            vectors[(i, dst)] = z;
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Eigenvalues only, ascending. Skips eigenvector accumulation.
pub fn eigvalsh(m: &ComplexMatrix) -> Result<Vec<f64>, NumError> {
    let mut a = hermitian_input(m)?;
    jacobi(&mut a, None)?;
    let mut values: Vec<f64> = (0..a.dim()).map(|k| a[(k, k)].re).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `φ(M)` for Hermitian `M`: same eigenvectors, eigenvalues mapped by `phi`.
pub fn spectral_function(
    m: &ComplexMatrix,
    phi: impl Fn(f64) -> f64,
) -> Result<ComplexMatrix, NumError> {
    Ok(eig_hermitian(m)?.apply(phi))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &ComplexMatrix) -> Result<f64, NumError> {
    let values = eigvalsh(m)?;
    Ok(values[0].abs().max(values[values.len() - 1].abs()))
}

fn fix_phase(col: &mut [C64]) {
    const NONZERO: f64 = 1e-12;
    if let Some(lead) = col.iter().find(|z| z.norm() > NONZERO) {
        let phase = lead.conj() / lead.norm();
        for z in col.iter_mut() {
            *z *= phase;
        }
    }
}

fn offdiag_mass(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(a: &mut ComplexMatrix, mut v: Option<&mut ComplexMatrix>) -> Result<(), NumError> {
    let n = a.dim();
    let tol = OFFDIAG_TOL * n as f64 * a.frobenius_norm().max(1.0);
    for _ in 0..MAX_SWEEPS {
        if offdiag_mass(a) < tol {
            return Ok(());
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(a, v.as_deref_mut(), p, q);
            }
        }
    }
    let residual = offdiag_mass(a);
    if residual < tol {
        Ok(())
    } else {
        Err(NumError::NoConvergence {
            sweeps: MAX_SWEEPS,
            residual,
        })
    }
}

fn rotate(a: &mut ComplexMatrix, v: Option<&mut ComplexMatrix>, p: usize, q: usize) {
    let n = a.dim();
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Below the resolution of the diagonal the rotation is the identity.
    if r < 1e-3 * f64::EPSILON * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase_conj = phase.conj();

    // A ← A·G, with G = diag(1, e^{-iφ}) on (p, q) followed by the real rotation.
    let data = a.as_mut_slice();
    for k in 0..n {
        let akp = data[k * n + p];
        let akq = data[k * n + q] * phase_conj;
        data[k * n + p] = akp * c - akq * s;
        data[k * n + q] = akp * s + akq * c;
    }
    // A ← G†·A.
    for k in 0..n {
        let apk = data[p * n + k];
        let aqk = data[q * n + k] * phase;
        data[p * n + k] = apk * c - aqk * s;
        data[q * n + k] = apk * s + aqk * c;
    }
    data[p * n + p] = C64::new(app - t * r, 0.0);
    data[q * n + q] = C64::new(aqq + t * r, 0.0);
    data[p * n + q] = ZERO;
    data[q * n + p] = ZERO;

    if let Some(v) = v {
        let vd = v.as_mut_slice();
        for k in 0..n {
            let vkp = vd[k * n + p];
            let vkq = vd[k * n + q] * phase_conj;
            vd[k * n + p] = vkp * c - vkq * s;
            vd[k * n + q] = vkp * s + vkq * c;
        }
    }
}
