//! Dense complex matrices, Hermitian validation, LU and norms.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::eigen::{jacobi_eigen, Eigen};
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real, C};

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![C::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cr(T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows; all rows must share one length.
    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(CMatrix { rows: r, cols, data })
    }

    /// Real matrix from nested rows. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, cols, |i, j| {
            assert_eq!(rows[i].len(), cols, "ragged literal");
            cr(T::lit(rows[i][j]))
        })
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = cr(v);
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C<T>>]) -> Self {
        let rows = columns.first().map_or(0, |col| col.len());
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        Self::from_fn(self.rows, end - start, |i, j| self[(i, start + j)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(cr(T::zero()), |acc, i| acc + self[(i, i)])
    }

    /// `self + s * I`.
    pub fn shift(&self, s: C<T>) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += s;
        }
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(cr(T::zero()), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Maximum absolute row sum; a cheap upper bound for the spectral norm.
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |acc, z| acc + z.norm()))
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation from Hermitian symmetry, `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Singular values in descending order, via the Hermitian dilation
    /// `[[0, M], [M*, 0]]` so that small values keep absolute accuracy.
    pub fn singular_values(&self) -> Result<Vec<T>> {
        let (r, k) = (self.rows, self.cols);
        let dil = Self::from_fn(r + k, r + k, |i, j| {
            if i < r && j >= r {
                self[(i, j - r)]
            } else if i >= r && j < r {
                self[(j, i - r)].conj()
            } else {
                cr(T::zero())
            }
        });
        let eig = jacobi_eigen(&dil)?;
        Ok(eig.values.iter().take(r.min(k)).map(|&v| v.max(T::zero())).collect())
    }

    pub fn spectral_norm(&self) -> Result<T> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(T::zero());
        }
        if self.is_square() && self.hermitian_defect() == T::zero() {
            let eig = jacobi_eigen(self)?;
            return Ok(eig.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs())));
        }
        Ok(self.singular_values()?[0])
    }

    /// Smallest singular value of a square matrix.
    pub fn min_singular_value(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::invalid("min_singular_value needs a square matrix"));
        }
        if self.rows == 0 {
            return Ok(T::zero());
        }
        if self.hermitian_defect() == T::zero() {
            let eig = jacobi_eigen(self)?;
            return Ok(eig.values.iter().fold(T::infinity(), |acc, v| acc.min(v.abs())));
        }
        Ok(*self.singular_values()?.last().unwrap())
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    /// Determinant by LU with partial pivoting; exactly zero once a pivot
    /// falls below `1e-300` in magnitude.
    pub fn det(&self) -> Result<C<T>> {
        Ok(self.lu()?.det())
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.lu()?;
        if lu.singular {
            return Err(Error::pre("matrix is singular"));
        }
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![cr(T::zero()); n];
            e[j] = cr(T::one());
            let x = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        Ok(inv)
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| c(U::lit(z.re.to_f64().unwrap()), U::lit(z.im.to_f64().unwrap())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: Self) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: Self) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: Self) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> fmt::Debug for CMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6e}{:+.6e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Real> serde::Serialize for CMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let part = |f: fn(&C<T>) -> T| -> Vec<Vec<T>> {
            (0..self.rows).map(|i| self.row(i).iter().map(f).collect()).collect()
        };
        let mut st = s.serialize_struct("CMatrix", 4)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("re", &part(|z| z.re))?;
        st.serialize_field("im", &part(|z| z.im))?;
        st.end()
    }
}

/// LU factorization `PA = LU` with partial pivoting, packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<T: Real> {
    packed: CMatrix<T>,
    perm: Vec<usize>,
    sign: T,
    /// True once some pivot fell below the underflow threshold.
    pub singular: bool,
}

impl<T: Real> Lu<T> {
    fn new(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!("LU needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        let tiny = T::lit(1e-300).max(T::min_positive_value());
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut singular = false;
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, m[(i, k)].norm()))
                .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best < tiny {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    m.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = m[(k, k)];
            for i in (k + 1)..n {
                let f = m[(i, k)] / piv;
                m[(i, k)] = f;
                if f.re == T::zero() && f.im == T::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let u = m[(k, j)];
                    m[(i, j)] -= f * u;
                }
            }
        }
        Ok(Lu { packed: m, perm, sign, singular })
    }

    pub fn det(&self) -> C<T> {
        if self.singular {
            return cr(T::zero());
        }
        let n = self.packed.rows;
        (0..n).fold(cr(self.sign), |acc, i| acc * self.packed[(i, i)])
    }

    /// Solves `Ax = b`. Meaningless when `singular` is set.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.packed.rows;
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.packed[(i, j)];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.packed[(i, j)];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] = x[i] / self.packed[(i, i)];
        }
        x
    }
}

/// A validated Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> Hermitian<T> {
    /// Validates finiteness and Hermitian symmetry within `1e-12 * ||M||_F`,
    /// then symmetrizes exactly.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!("matrix is {}x{}, expected square", m.rows, m.cols)));
        }
        for i in 0..m.rows {
            for j in 0..m.cols {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::invalid(format!("entry ({i},{j}) is not finite")));
                }
            }
        }
        let tol = T::tol(1e-12) * m.frobenius_norm();
        for i in 0..m.rows {
            for j in i..m.cols {
                let d = (m[(i, j)] - m[(j, i)].conj()).norm();
                if d > tol {
                    return Err(Error::invalid(format!(
                        "entry ({i},{j}) breaks Hermitian symmetry by {d:e} (tolerance {tol:e})"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Averages `M` with its adjoint without validation.
    pub fn symmetrized(m: CMatrix<T>) -> Self {
        let half = T::lit(0.5);
        let adj = m.adjoint();
        let mut s = (&m + &adj).scale_re(half);
        for i in 0..s.rows {
            s[(i, i)].im = T::zero();
        }
        Hermitian { m: s }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows))
    }

    pub fn diag(values: &[T]) -> Self {
        Hermitian { m: CMatrix::diag(values) }
    }

    pub fn identity(n: usize) -> Self {
        Hermitian { m: CMatrix::identity(n) }
    }

    pub fn n(&self) -> usize {
        self.m.rows
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn eigen(&self) -> Result<Eigen<T>> {
        jacobi_eigen(&self.m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(self.eigen()?.values)
    }

    /// Spectral norm, i.e. the largest eigenvalue magnitude.
    pub fn norm(&self) -> Result<T> {
        self.m.spectral_norm()
    }

    pub fn scale(&self, s: T) -> Self {
        Hermitian { m: self.m.scale_re(s) }
    }

    /// `A + s I`.
    pub fn shift(&self, s: T) -> Self {
        Hermitian { m: self.m.shift(cr(s)) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Hermitian { m: &self.m + &other.m }
    }

    /// The perturbation family `(1 + eps) A - lam * eps * I`.
    pub fn perturb(&self, eps: T, lam: T) -> Self {
        Hermitian { m: self.m.scale_re(T::one() + eps).shift(cr(-lam * eps)) }
    }

    /// Unitary (or isometric) compression `Q* A Q`.
    pub fn compress(&self, q: &CMatrix<T>) -> Self {
        Self::symmetrized(&(&q.adjoint() * &self.m) * q)
    }

    pub fn cast<U: Real>(&self) -> Hermitian<U> {
        Hermitian { m: self.m.cast() }
    }
}

/// Spectral norm of the commutator `AB - BA`.
pub fn commutator_norm<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>) -> Result<T> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!("dimension mismatch: {} vs {}", a.n(), b.n())));
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    // i[A,B] is Hermitian, so its norm is its largest eigenvalue magnitude.
    let k = (&ab - &ba).scale(c(T::zero(), T::one()));
    Hermitian::symmetrized(k).norm()
}

/// Orthonormalizes columns in place with two passes of modified Gram-Schmidt.
/// Returns the number of columns kept (rank-deficient columns are dropped).
pub fn orthonormalize<T: Real>(cols: &mut Vec<Vec<C<T>>>, drop_tol: T) -> usize {
    let mut kept: Vec<Vec<C<T>>> = Vec::with_capacity(cols.len());
    for v in cols.iter() {
        let mut w = v.clone();
        let orig = norm(&w);
        for _ in 0..2 {
            for q in &kept {
                let d = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= *qi * d;
                }
            }
        }
        let nw = norm(&w);
        if nw > drop_tol * orig.max(T::min_positive_value()) {
            for wi in w.iter_mut() {
                *wi = *wi / nw;
            }
            kept.push(w);
        }
    }
    *cols = kept;
    cols.len()
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(cr(T::zero()), |acc, (&x, &y)| acc + x.conj() * y)
}

pub fn norm<T: Real>(a: &[C<T>]) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}
