//! Real bivariate polynomials, lines and polydisks in C^2.

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

/// Dense real polynomial `sum c_ij x^i y^j` over `i + j <= degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<T> {
    degree: usize,
    coeffs: Vec<T>,
}

#[inline]
fn offset(d: usize, i: usize) -> usize {
    i * (d + 1) - i * i.saturating_sub(1) / 2
}

impl<T: Real> BiPoly<T> {
    pub fn zero(degree: usize) -> Self {
        BiPoly { degree, coeffs: vec![T::zero(); (degree + 1) * (degree + 2) / 2] }
    }

    pub fn constant(v: T) -> Self {
        let mut p = Self::zero(0);
        p.set(0, 0, v);
        p
    }

    /// Builds a polynomial from `(i, j, c)` terms; repeated terms add up.
    pub fn from_terms(terms: &[(usize, usize, T)]) -> Self {
        let degree = terms.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0);
        let mut p = Self::zero(degree);
        for &(i, j, v) in terms {
            let old = p.get(i, j);
            p.set(i, j, old + v);
        }
        p
    }

    /// Nominal degree (storage bound); see [`BiPoly::effective_degree`].
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + j <= self.degree);
        offset(self.degree, i) + j
    }

    /// Coefficient of `x^i y^j`; zero outside the stored range.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i + j > self.degree {
            T::zero()
        } else {
            self.coeffs[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i + j <= self.degree, "term x^{i} y^{j} exceeds degree {}", self.degree);
        let k = self.idx(i, j);
        self.coeffs[k] = v;
    }

    /// Nonzero terms as `(i, j, c)` in lexicographic order.
    pub fn terms(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for i in 0..=self.degree {
            for j in 0..=(self.degree - i) {
                let v = self.get(i, j);
                if v != T::zero() {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coef_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, &v| a + v * v).sqrt()
    }

    /// Highest total degree whose homogeneous part exceeds `rel * coef_norm`.
    pub fn effective_degree(&self, rel: T) -> usize {
        let cut = rel * self.coef_norm();
        (0..=self.degree)
            .rev()
            .find(|&s| (0..=s).any(|i| self.get(i, s - i).abs() > cut))
            .unwrap_or(0)
    }

    /// Copy with nominal degree reduced to `d` (higher terms dropped).
    pub fn truncate(&self, d: usize) -> Self {
        let mut p = Self::zero(d);
        for i in 0..=d.min(self.degree) {
            for j in 0..=(d - i).min(self.degree - i) {
                p.set(i, j, self.get(i, j));
            }
        }
        p
    }

    pub fn eval(&self, x: C<T>, y: C<T>) -> C<T> {
        let mut acc = cr(T::zero());
        for i in (0..=self.degree).rev() {
            let mut inner = cr(T::zero());
            for j in (0..=(self.degree - i)).rev() {
                inner = inner * y + self.get(i, j);
            }
            acc = acc * x + inner;
        }
        acc
    }

    pub fn eval_real(&self, x: T, y: T) -> T {
        self.eval(cr(x), cr(y)).re
    }

    pub fn dx(&self) -> Self {
        let d = self.degree.max(1) - 1;
        let mut p = Self::zero(d);
        for i in 1..=self.degree {
            for j in 0..=(self.degree - i) {
                p.set(i - 1, j, self.get(i, j) * T::from_usize(i).unwrap());
            }
        }
        p
    }

    pub fn dy(&self) -> Self {
        let d = self.degree.max(1) - 1;
        let mut p = Self::zero(d);
        for i in 0..self.degree {
            for j in 1..=(self.degree - i) {
                p.set(i, j - 1, self.get(i, j) * T::from_usize(j).unwrap());
            }
        }
        p
    }

    pub fn scale(&self, s: T) -> Self {
        BiPoly { degree: self.degree, coeffs: self.coeffs.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.degree.max(other.degree);
        let mut p = Self::zero(d);
        for i in 0..=d {
            for j in 0..=(d - i) {
                p.set(i, j, self.get(i, j) + other.get(i, j));
            }
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero(self.degree + other.degree);
        for (i, j, a) in self.terms() {
            for (k, l, b) in other.terms() {
                let old = p.get(i + k, j + l);
                p.set(i + k, j + l, old + a * b);
            }
        }
        p
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(Self::constant(T::one()), |acc, _| acc.mul(self))
    }

    /// Rescales so the constant term is `-1`.
    pub fn normalized(&self) -> Result<Self> {
        let c0 = self.get(0, 0);
        if c0 == T::zero() {
            return Err(Error::pre("constant term is zero; cannot normalize to -1"));
        }
        Ok(self.scale(-T::one() / c0))
    }

    /// `P(sx * x, sy * y)`.
    pub fn scale_vars(&self, sx: T, sy: T) -> Self {
        let mut p = self.clone();
        for i in 0..=self.degree {
            for j in 0..=(self.degree - i) {
                p.set(i, j, self.get(i, j) * sx.powi(i as i32) * sy.powi(j as i32));
            }
        }
        p
    }

    /// Substitutes `x = x0 + xs*s + xt*t`, `y = y0 + ys*s + yt*t`.
    pub fn compose_affine(&self, x: [T; 3], y: [T; 3]) -> Self {
        let lx = BiPoly::from_terms(&[(0, 0, x[0]), (1, 0, x[1]), (0, 1, x[2])]);
        let ly = BiPoly::from_terms(&[(0, 0, y[0]), (1, 0, y[1]), (0, 1, y[2])]);
        let d = self.degree;
        let mut xp = vec![BiPoly::constant(T::one())];
        let mut yp = vec![BiPoly::constant(T::one())];
        for k in 1..=d {
            xp.push(xp[k - 1].mul(&lx));
            yp.push(yp[k - 1].mul(&ly));
        }
        let mut out = Self::zero(d);
        for (i, j, v) in self.terms() {
            out = out.add(&xp[i].mul(&yp[j]).scale(v));
        }
        out.truncate(d)
    }

    /// Projective shift used to move a curve along with `A + da I`,
    /// `B + db I`: returns `(1 - da x - db y)^k P(x / w, y / w)` with
    /// `w = 1 - da x - db y` and `k` the nominal degree.
    pub fn projective_shift(&self, da: T, db: T) -> Self {
        let k = self.degree;
        let w = BiPoly::from_terms(&[(0, 0, T::one()), (1, 0, -da), (0, 1, -db)]);
        let wp: Vec<Self> = (0..=k).map(|e| w.pow(e)).collect();
        let mut out = Self::zero(k);
        for (i, j, v) in self.terms() {
            let mono = BiPoly::from_terms(&[(i, j, v)]);
            out = out.add(&mono.mul(&wp[k - i - j]));
        }
        out.truncate(k)
    }

    /// Ascending coefficients in `x` of `P(x, y)` for fixed `y`.
    pub fn fiber_x(&self, y: C<T>) -> Vec<C<T>> {
        (0..=self.degree)
            .map(|i| (0..=(self.degree - i)).rev().fold(cr(T::zero()), |acc, j| acc * y + self.get(i, j)))
            .collect()
    }

    /// Ascending coefficients in `y` of `P(x, y)` for fixed `x`.
    pub fn fiber_y(&self, x: C<T>) -> Vec<C<T>> {
        (0..=self.degree)
            .map(|j| (0..=(self.degree - j)).rev().fold(cr(T::zero()), |acc, i| acc * x + self.get(i, j)))
            .collect()
    }

    /// Univariate restriction `t -> P(p0 + t d)` along a line, with `p0` the
    /// point of the line nearest the origin and `d` its unit direction.
    pub fn restrict_to_line(&self, line: &Line<T>) -> Vec<T> {
        let (p0, d) = (line.foot(), line.direction());
        let q = self.compose_affine([p0.0, d.0, T::zero()], [p0.1, d.1, T::zero()]);
        (0..=self.degree).map(|i| q.get(i, 0)).collect()
    }

    pub fn cast<U: Real>(&self) -> BiPoly<U> {
        BiPoly { degree: self.degree, coeffs: self.coeffs.iter().map(|v| U::lit(v.to_f64().unwrap())).collect() }
    }
}

/// The complex line `{ alpha x + beta y = 1 }` with real coefficients.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Line<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Real> Line<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || (alpha == T::zero() && beta == T::zero()) {
            return Err(Error::invalid("line needs finite (alpha, beta) not both zero"));
        }
        Ok(Line { alpha, beta })
    }

    pub fn normal_len(&self) -> T {
        self.alpha.hypot(self.beta)
    }

    /// Unit normal `(alpha, beta) / |(alpha, beta)|`.
    pub fn normal(&self) -> (T, T) {
        let n = self.normal_len();
        (self.alpha / n, self.beta / n)
    }

    /// Unit direction `(-beta, alpha) / |(alpha, beta)|`.
    pub fn direction(&self) -> (T, T) {
        let n = self.normal_len();
        (-self.beta / n, self.alpha / n)
    }

    /// Point of the line nearest the origin.
    pub fn foot(&self) -> (T, T) {
        let n2 = self.alpha * self.alpha + self.beta * self.beta;
        (self.alpha / n2, self.beta / n2)
    }

    /// Hermitian distance from a point of C^2 to the line.
    pub fn distance(&self, x: C<T>, y: C<T>) -> T {
        (x * self.alpha + y * self.beta - T::one()).norm() / self.normal_len()
    }

    /// `alpha x + beta y - 1` as a polynomial.
    pub fn poly(&self) -> BiPoly<T> {
        BiPoly::from_terms(&[(0, 0, -T::one()), (1, 0, self.alpha), (0, 1, self.beta)])
    }
}

/// Polydisk `{ |x - cx| <= rho, |y - cy| <= rho }`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PolyDisk<T> {
    pub cx: T,
    pub cy: T,
    pub rho: T,
}

impl<T: Real> PolyDisk<T> {
    pub fn new(cx: T, cy: T, rho: T) -> Result<Self> {
        if !(rho > T::zero() && rho.is_finite() && cx.is_finite() && cy.is_finite()) {
            return Err(Error::invalid("polydisk needs finite center and positive radius"));
        }
        Ok(PolyDisk { cx, cy, rho })
    }

    pub fn contains(&self, x: C<T>, y: C<T>) -> bool {
        let slack = self.rho * T::tol(1e-12);
        (x - self.cx).norm() <= self.rho + slack && (y - self.cy).norm() <= self.rho + slack
    }
}

/// Multiplicity of the line as a factor of `p`.
///
/// `p` is rewritten in rotated coordinates `(s, t)` (normal and tangential
/// offsets from the foot point, scaled by the foot distance) and the count is
/// the number of leading `s`-slices whose coefficient norm is at most
/// `tol` relative to the whole polynomial.
pub fn line_containment<T: Real>(p: &BiPoly<T>, line: &Line<T>, tol: T) -> Result<usize> {
    let total = p.coef_norm();
    if total == T::zero() {
        return Err(Error::pre("zero polynomial contains every line"));
    }
    let (f, n, d) = (line.foot(), line.normal(), line.direction());
    let sigma = T::one() / line.normal_len();
    let q = p.compose_affine([f.0, sigma * n.0, sigma * d.0], [f.1, sigma * n.1, sigma * d.1]);
    let qn = q.coef_norm();
    let deg = q.degree();
    let mut m = 0;
    while m <= deg {
        let slice = (0..=(deg - m)).fold(T::zero(), |a, j| a + q.get(m, j).powi(2)).sqrt();
        if slice > tol * qn {
            break;
        }
        m += 1;
    }
    Ok(m.min(deg))
}
