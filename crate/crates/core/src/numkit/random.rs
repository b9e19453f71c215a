//! Seeded random matrices.
//!
//! All randomness in the crate comes from ChaCha8 streams keyed by a single
//! `u64` seed, so any instance can be regenerated on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, norm, ComplexMatrix, C64, ZERO};

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// `(G + G†)/2` with i.i.d. complex Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian_complex(rng));
    g.hermitian_part()
}

/// `k` orthonormal columns from Gram–Schmidt on Gaussian vectors.
pub fn random_orthonormal_columns<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    k: usize,
) -> Vec<Vec<C64>> {
    assert!(
        k <= dim,
        "cannot fit {k} orthonormal vectors in dimension {dim}"
    );
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        // Two passes keep the basis orthonormal to machine precision.
        for _ in 0..2 {
            for c in &cols {
                let ov = inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= ov * y;
                }
            }
        }
        let nv = norm(&v);
        if nv < 1e-8 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        cols.push(v);
    }
    cols
}

/// Haar-distributed unitary.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let cols = random_orthonormal_columns(rng, dim, dim);
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Real orthogonal matrix (Gram–Schmidt on real Gaussian vectors).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), 0.0))
            .collect();
        for _ in 0..2 {
            for c in &cols {
                let ov = inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= ov * y;
                }
            }
        }
        let nv = norm(&v);
        if nv < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| C64::new(x.re / nv, 0.0)).collect());
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// Rank-`rank` orthogonal projector in dimension `dim`.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    if rank == 0 {
        return ComplexMatrix::zeros(dim);
    }
    let cols = random_orthonormal_columns(rng, dim, rank);
    ComplexMatrix::projector_onto(dim, &cols)
}

/// A uniformly random permutation of `0..n` (Fisher–Yates).
pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

pub fn zero_vector(dim: usize) -> Vec<C64> {
    vec![ZERO; dim]
}
