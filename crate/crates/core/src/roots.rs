//! Roots of univariate complex polynomials via companion-matrix eigenvalues.

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{c, cr, Real, C};

/// Evaluates `sum a_i t^i` (ascending coefficients) by Horner's rule.
pub fn horner<T: Real>(a: &[C<T>], t: C<T>) -> C<T> {
    a.iter().rev().fold(cr(T::zero()), |acc, &ai| acc * t + ai)
}

/// Coefficients of the derivative.
pub fn derivative<T: Real>(a: &[C<T>]) -> Vec<C<T>> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ai)| ai * T::from_usize(i).unwrap())
        .collect()
}

/// Drops leading coefficients below `rel * max|a_i|`; these correspond to
/// roots at infinity.
pub fn trim_leading<T: Real>(a: &[C<T>], rel: T) -> Vec<C<T>> {
    let big = a.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let mut end = a.len();
    while end > 0 && a[end - 1].norm() <= rel * big {
        end -= 1;
    }
    a[..end].to_vec()
}

/// All finite roots of `sum a_i t^i`, counted with multiplicity.
///
/// Leading coefficients below `1e-13` relative to the largest are treated as
/// zero. The zero polynomial has no well-defined roots and is rejected.
pub fn roots<T: Real>(a: &[C<T>]) -> Result<Vec<C<T>>> {
    let a = trim_leading(a, T::tol(1e-13));
    if a.is_empty() {
        return Err(Error::pre("zero polynomial has no isolated roots"));
    }
    let mut zeros = 0;
    while zeros < a.len() - 1 && a[zeros].norm() == T::zero() {
        zeros += 1;
    }
    let core = &a[zeros..];
    let d = core.len() - 1;
    let mut out = vec![cr(T::zero()); zeros];
    if d == 0 {
        return Ok(out);
    }
    let lead = core[d];
    let b: Vec<C<T>> = core.iter().map(|&z| z / lead).collect();
    // Rescale t = s * tau so the monic coefficients are balanced.
    let mut s = T::zero();
    for (i, bi) in b.iter().enumerate().take(d) {
        let mag = bi.norm();
        if mag > T::zero() {
            s = s.max(mag.powf(T::one() / T::from_usize(d - i).unwrap()));
        }
    }
    if s == T::zero() {
        s = T::one();
    }
    let mut h = CMatrix::zeros(d, d);
    for j in 0..d {
        // coefficient of tau^(d-1-j) in the monic scaled polynomial
        let i = d - 1 - j;
        h[(0, j)] = -b[i] / s.powi((d - i) as i32);
    }
    for i in 1..d {
        h[(i, i - 1)] = cr(T::one());
    }
    let ev = hessenberg_eigenvalues(h)?;
    let da = derivative(core);
    for z in ev {
        out.push(polish(core, &da, z * s));
    }
    Ok(out)
}

fn polish<T: Real>(a: &[C<T>], da: &[C<T>], mut z: C<T>) -> C<T> {
    let mut fz = horner(a, z).norm();
    for _ in 0..3 {
        let d = horner(da, z);
        if d.norm() == T::zero() {
            break;
        }
        let cand = z - horner(a, z) / d;
        let fc = horner(a, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// Eigenvalues of a complex upper-Hessenberg matrix by single-shift QR with
/// Wilkinson shifts and deflation.
pub fn hessenberg_eigenvalues<T: Real>(mut h: CMatrix<T>) -> Result<Vec<C<T>>> {
    let n = h.rows();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    let eps = T::epsilon();
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out.push(h[(0, 0)]);
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == T::zero() { T::one() } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = cr(T::zero());
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n {
            return Err(Error::numerical("Hessenberg QR failed to converge"));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift to break cycles
            h[(hi, hi)] + c(T::lit(0.75), T::lit(0.4375)) * h[(hi, hi - 1)].norm()
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let cc = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = T::lit(0.5);
            let m = (a + d) * half;
            let disc = (((a - d) * half) * ((a - d) * half) + b * cc).sqrt();
            let (m1, m2) = (m + disc, m - disc);
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (cs, sn) = if r == T::zero() { (cr(T::one()), cr(T::zero())) } else { (x / r, y / r) };
            for j in k..=hi {
                let (u, v) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = cs.conj() * u + sn.conj() * v;
                h[(k + 1, j)] = -sn * u + cs * v;
            }
            rots.push((cs, sn));
        }
        for (off, &(cs, sn)) in rots.iter().enumerate() {
            let k = l + off;
            for i in l..=(k + 1).min(hi) {
                let (u, v) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = u * cs + v * sn;
                h[(i, k + 1)] = -u * sn.conj() + v * cs.conj();
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(out)
}
