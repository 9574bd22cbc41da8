//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::{orthonormalize, CMatrix};
use crate::scalar::{cr, Real, C};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen<T: Real> {
    /// Eigenvalues, descending.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix<T>,
    /// Index ranges of eigenvalues closer than `1e-9 * ||A||` to a neighbour.
    pub clusters: Vec<Range<usize>>,
    pub sweeps: usize,
}

impl<T: Real> Eigen<T> {
    /// Index of the eigenvalue nearest `target`.
    pub fn nearest(&self, target: T) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if (v - target).abs() < (self.values[best] - target).abs() {
                best = i;
            }
        }
        best
    }

    /// The cluster containing eigenvalue index `i`.
    pub fn cluster_of(&self, i: usize) -> Range<usize> {
        self.clusters.iter().find(|r| r.contains(&i)).cloned().unwrap_or(i..i + 1)
    }

    /// Orthonormal basis (as columns) of the eigenspace for the indices in `r`.
    pub fn basis(&self, r: Range<usize>) -> CMatrix<T> {
        self.vectors.column_block(r.start, r.end)
    }

    /// Orthogonal projection onto the span of eigenvectors with indices in `r`.
    pub fn projector(&self, r: Range<usize>) -> CMatrix<T> {
        let q = self.basis(r);
        &q * &q.adjoint()
    }

    /// Rebuilds `V f(D) V*` for a function of the eigenvalues.
    pub fn function(&self, f: impl Fn(T) -> C<T>) -> CMatrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let fd: Vec<C<T>> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(cr(T::zero()), |acc, k| acc + v[(i, k)] * fd[k] * v[(j, k)].conj())
        })
    }
}

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius mass is at most `1e-13 * ||A||_F`
/// or after 100 sweeps.
pub fn jacobi_eigen<T: Real>(h: &CMatrix<T>) -> Result<Eigen<T>> {
    if !h.is_square() {
        return Err(Error::invalid("eigen-decomposition needs a square matrix"));
    }
    if !h.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = h.rows();
    let mut a = h.clone();
    let mut v = CMatrix::<T>::identity(n);
    let total = a.frobenius_norm();
    let target = T::tol(1e-13) * total;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal(&a);
        if off <= target || total == T::zero() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            if off > T::tol(1e-8) * total {
                return Err(Error::numerical(format!(
                    "Jacobi did not converge: off-diagonal mass {off:e} after {MAX_SWEEPS} sweeps"
                )));
            }
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

    let scale = values.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
    let gap = T::tol(1e-9) * scale;
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || values[i - 1] - values[i] >= gap {
            if i - start > 1 {
                clusters.push(start..i);
            }
            start = i;
        }
    }
    for r in &clusters {
        let mut cols: Vec<Vec<C<T>>> = r.clone().map(|j| vectors.column(j)).collect();
        orthonormalize(&mut cols, T::zero());
        for (off, col) in cols.iter().enumerate() {
            for i in 0..n {
                vectors[(i, r.start + off)] = col[i];
            }
        }
    }
    Ok(Eigen { values, vectors, clusters, sweeps })
}

fn off_diagonal<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One rotation zeroing `a[p][q]`: a phase on column q makes the pivot real,
/// then a real Givens rotation annihilates it.
fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= T::min_positive_value() {
        return;
    }
    let e = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let zeta = (aqq - app) / (r + r);
    let t = if zeta == T::zero() {
        T::one()
    } else {
        zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt())
    };
    let cs = T::one() / (T::one() + t * t).sqrt();
    let sn = t * cs;
    let ebar = e.conj();
    // G restricted to (p, q): [[c, s], [-s e*, c e*]].
    let (gpp, gpq, gqp, gqq) = (cr(cs), cr(sn), -ebar * sn, ebar * cs);
    let n = a.rows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = cr(T::zero());
    a[(q, p)] = cr(T::zero());
    a[(p, p)].im = T::zero();
    a[(q, q)].im = T::zero();
}
