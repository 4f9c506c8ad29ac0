//! Dense complex eigen-solver helpers for the non-Hermitian Hamiltonian.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigen-residuals above this (relative to ‖H‖) mark a cluster as defective.
const NULL_SPACE_TOL: f64 = 1e-7;

/// Smallest singular value of the left/right Gram block below which a
/// cluster is an exceptional point.
pub const EXCEPTIONAL_POINT_TOL: f64 = 1e-10;

pub(crate) fn eigenvalues(h: &DMatrix<Complex64>) -> Vec<Complex64> {
    if h.is_empty() {
        return Vec::new();
    }
    let schur = Schur::new(h.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Biorthonormal eigen-decomposition `H = Σ λ_n R_n L_n†` with `L_n† R_m = δ_nm`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    pub right: Vec<DVector<Complex64>>,
    pub left: Vec<DVector<Complex64>>,
}

fn clusters(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            if (values[a] - values[b]).norm() < radius {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

/// Orthonormalize the columns of `x` in place (modified Gram–Schmidt).
fn orthonormalize(x: &mut DMatrix<Complex64>) {
    for c in 0..x.ncols() {
        for p in 0..c {
            let proj = x.column(p).dotc(&x.column(c));
            let prev = x.column(p).into_owned();
            x.column_mut(c).axpy(-proj, &prev, Complex64::new(1.0, 0.0));
        }
        let norm = x.column(c).norm();
        if norm > 0.0 {
            x.column_mut(c).unscale_mut(norm);
        }
    }
}

/// Deterministic, generic starting block for inverse iteration.
fn start_block(n: usize, k: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, k, |i, j| {
        let a = (i * 7 + j * 13 + 1) as f64;
        Complex64::new((a * 0.618_033_988_7).sin() + 1.3, (a * 0.414_213_562_3).cos())
    })
}

/// Basis of the dominant `k`-dimensional invariant subspace of `(a)⁻¹`.
fn inverse_iteration(a: &DMatrix<Complex64>, k: usize) -> Option<DMatrix<Complex64>> {
    let lu = a.clone().lu();
    let mut x = start_block(a.nrows(), k);
    orthonormalize(&mut x);
    for _ in 0..INVERSE_ITERATIONS {
        x = lu.solve(&x)?;
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return None;
        }
        orthonormalize(&mut x);
    }
    Some(x)
}

const INVERSE_ITERATIONS: usize = 4;

/// Eigen-decompose `h`, grouping eigenvalues closer than `cluster_radius`.
///
/// Each cluster is resolved by block inverse iteration (right vectors with
/// `h`, left vectors with `h†`), then biorthonormalized as a block.
/// Defective clusters (exceptional points) are rejected.
pub fn biorthogonal_eigensystem(h: &DMatrix<Complex64>, cluster_radius: f64) -> Result<Eigensystem> {
    let n = h.nrows();
    let values = eigenvalues(h);
    let norm = h.norm().max(1.0);

    let mut out = Eigensystem {
        values: Vec::with_capacity(n),
        right: Vec::with_capacity(n),
        left: Vec::with_capacity(n),
    };

    for group in clusters(&values, cluster_radius) {
        let k = group.len();
        let cluster: Vec<Complex64> = group.iter().map(|&i| values[i]).collect();
        let degenerate = || Error::DegenerateSpectrum { cluster: cluster.clone() };
        let mu = cluster.iter().sum::<Complex64>() / k as f64;
        // a tiny complex shift keeps the factorization regular at an exact eigenvalue
        let sigma = mu + Complex64::new(1.0, 1.0) * (1e-13 * norm);
        let shifted = h - DMatrix::from_diagonal_element(n, n, sigma);
        let right = inverse_iteration(&shifted, k).ok_or_else(degenerate)?;
        let left = inverse_iteration(&shifted.adjoint(), k).ok_or_else(degenerate)?;

        let centered = h - DMatrix::from_diagonal_element(n, n, mu);
        let residual = (&centered * &right).norm().max((left.adjoint() * &centered).norm());
        if residual > NULL_SPACE_TOL * norm {
            return Err(degenerate());
        }

        let gram = left.adjoint() * &right;
        let inverse = gram.try_inverse().ok_or_else(degenerate)?;
        // 1/‖G⁻¹‖_F bounds the smallest singular value of G from below
        if 1.0 / inverse.norm() < EXCEPTIONAL_POINT_TOL {
            return Err(degenerate());
        }
        let right = &right * inverse;
        let projected = left.adjoint() * h * &right;
        for c in 0..k {
            out.values.push(projected[(c, c)]);
            out.right.push(right.column(c).into_owned());
            out.left.push(left.column(c).into_owned());
        }
    }
    Ok(out)
}
