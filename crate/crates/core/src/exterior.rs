//! Exterior powers as compound matrices, and generic spectral multisets.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Hermitian};
use crate::scalar::Real;

/// All strictly increasing `k`-subsets of `0..n`, in lexicographic order.
///
/// This is the basis order `e_{i1} ^ ... ^ e_{ik}` used by every compound
/// matrix in the crate.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance the rightmost index that still has room
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in (i + 1)..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Label of a subset with 1-based indices: `"13"`, or `"1,10"` once any index
/// needs two digits.
pub fn subset_label(s: &[usize], n: usize) -> String {
    let parts: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
    if n >= 10 {
        parts.join(",")
    } else {
        parts.concat()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn minor<T: Real>(a: &CMatrix<T>, rows: &[usize], cols: &[usize]) -> Result<crate::scalar::C<T>> {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]).det()
}

/// The `k`-th compound matrix: entry `(I, J)` is `det A[I, J]` over
/// lexicographically ordered `k`-subsets.
pub fn exterior_power<T: Real>(a: &CMatrix<T>, k: usize) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::invalid("exterior power needs a square matrix"));
    }
    let n = a.rows();
    if k < 1 || k > n {
        return Err(Error::invalid(format!("exterior order k = {k} outside 1..={n}")));
    }
    let idx = subsets(n, k);
    let m = idx.len();
    let mut out = CMatrix::zeros(m, m);
    for (p, rows) in idx.iter().enumerate() {
        for (q, cols) in idx.iter().enumerate() {
            out[(p, q)] = minor(a, rows, cols)?;
        }
    }
    Ok(out)
}

/// Exterior power of a Hermitian matrix, which is again Hermitian.
pub fn exterior_power_hermitian<T: Real>(a: &Hermitian<T>, k: usize) -> Result<Hermitian<T>> {
    Ok(Hermitian::symmetrized(exterior_power(a.matrix(), k)?))
}

fn complement(s: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !s.contains(i)).collect()
}

/// `det(A) * ^k(A^-1)`, the action of `^(N-k) A` on `^k H`.
///
/// Computed through complementary minors,
/// `det(A) det(A^-1[I, J]) = (-1)^(|I| + |J|) det A[J^c, I^c]`,
/// so no inverse is formed.
pub fn complementary_power<T: Real>(a: &Hermitian<T>, k: usize) -> Result<Hermitian<T>> {
    let n = a.n();
    if k < 1 || k >= n {
        return Err(Error::invalid(format!("complementary order k = {k} outside 1..{n}")));
    }
    let det = a.matrix().det()?;
    let scale = a.norm()?.powi(n as i32);
    if !(det.norm() > T::tol(1e-12) * scale) {
        return Err(Error::pre(format!("matrix is singular (|det| = {:e})", det.norm())));
    }
    let idx = subsets(n, k);
    let m = idx.len();
    let mat = a.matrix();
    let mut out = CMatrix::zeros(m, m);
    for (p, rows) in idx.iter().enumerate() {
        let rc = complement(rows, n);
        let sr: usize = rows.iter().sum();
        for (q, cols) in idx.iter().enumerate() {
            let cc = complement(cols, n);
            let sc: usize = cols.iter().sum();
            let v = minor(mat, &cc, &rc)?;
            out[(p, q)] = if (sr + sc) % 2 == 0 { v } else { -v };
        }
    }
    Ok(Hermitian::symmetrized(out))
}

/// A multiset of eigenvalues of a reference matrix and its product.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SpectralMultiset<T> {
    pub values: Vec<T>,
    pub product: T,
}

impl<T: Real> SpectralMultiset<T> {
    pub fn new(values: Vec<T>) -> Self {
        let product = values.iter().fold(T::one(), |a, &v| a * v);
        SpectralMultiset { values, product }
    }
}

/// Outcome of [`is_generic_multiset`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Genericity<T> {
    pub generic: bool,
    pub product: T,
    pub gap_tol: T,
    /// Every eigenvalue-index subset whose product lies within `gap_tol` of the
    /// target (exactly one when generic).
    pub matches: Vec<(Vec<usize>, T)>,
}

/// Default gap `1e-6 (1 + |lambda|)`.
pub fn default_gap_tol<T: Real>(product: T) -> T {
    T::tol(1e-6) * (T::one() + product.abs())
}

/// Whether the product of `l` is attained by exactly one `k`-subset of the
/// spectrum of `a` (with multiplicity), up to `gap_tol`.
pub fn is_generic_multiset<T: Real>(a: &Hermitian<T>, l: &SpectralMultiset<T>, gap_tol: Option<T>) -> Result<Genericity<T>> {
    let ev = a.eigenvalues()?;
    let n = ev.len();
    let k = l.values.len();
    if k < 1 || k > n {
        return Err(Error::invalid(format!("multiset size {k} outside 1..={n}")));
    }
    let tol = T::tol(1e-9) * ev.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    for &v in &l.values {
        let avail = ev.iter().filter(|&&e| (e - v).abs() <= tol).count();
        let used = l.values.iter().filter(|&&w| (w - v).abs() <= tol).count();
        if avail == 0 {
            return Err(Error::pre(format!("{v} is not an eigenvalue of the reference matrix")));
        }
        if used > avail {
            return Err(Error::pre(format!("{v} occurs {used} times but has multiplicity {avail}")));
        }
    }
    let gap = gap_tol.unwrap_or_else(|| default_gap_tol(l.product));
    let matches: Vec<(Vec<usize>, T)> = subsets(n, k)
        .into_iter()
        .map(|s| {
            let p = s.iter().fold(T::one(), |acc, &i| acc * ev[i]);
            (s, p)
        })
        .filter(|(_, p)| (*p - l.product).abs() <= gap)
        .collect();
    Ok(Genericity { generic: matches.len() == 1, product: l.product, gap_tol: gap, matches })
}

/// Identity check helper: `(^(N-k) A)(^k A) - det(A) I`.
pub fn sylvester_defect<T: Real>(a: &Hermitian<T>, k: usize) -> Result<T> {
    let comp = complementary_power(a, k)?;
    let ext = exterior_power(a.matrix(), k)?;
    let det = a.matrix().det()?;
    let prod = comp.matrix() * &ext;
    let resid = &prod - &CMatrix::identity(prod.rows()).scale(det);
    Ok(resid.max_abs() / det.norm().max(T::min_positive_value()))
}
