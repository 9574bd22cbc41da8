//! The determining polynomial `det(x A1 + y A2 - I)` and its zero set.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Hermitian};
use crate::poly::{line_containment, BiPoly, Line, PolyDisk};
use crate::roots::roots;
use crate::scalar::{c, cr, Real, C};

fn check_pair<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>) -> Result<()> {
    if a1.n() != a2.n() {
        return Err(Error::invalid(format!("dimension mismatch: {} vs {}", a1.n(), a2.n())));
    }
    Ok(())
}

/// The matrix `x A1 + y A2 - I`.
pub fn pencil_matrix<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, x: C<T>, y: C<T>) -> CMatrix<T> {
    (&a1.matrix().scale(x) + &a2.matrix().scale(y)).shift(cr(-T::one()))
}

/// `det(x A1 + y A2 - I)`.
pub fn eval_pencil<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, x: C<T>, y: C<T>) -> Result<C<T>> {
    check_pair(a1, a2)?;
    pencil_matrix(a1, a2, x, y).det()
}

/// Monomial coefficients of the Chebyshev polynomials `T_0..=T_n`.
fn chebyshev_table<T: Real>(n: usize) -> Vec<Vec<T>> {
    let mut t = vec![vec![T::zero(); n + 1]; n + 1];
    t[0][0] = T::one();
    if n >= 1 {
        t[1][1] = T::one();
    }
    for i in 2..=n {
        for p in 0..=i {
            let up = if p >= 1 { t[i - 1][p - 1] + t[i - 1][p - 1] } else { T::zero() };
            t[i][p] = up - t[i - 2][p];
        }
    }
    t
}

/// Interpolates `det(x A1 + y A2 - I)` on an `(N+1) x (N+1)` Chebyshev grid
/// and returns it in monomial form with constant term `-1`.
///
/// The variables are scaled by the operator norms before fitting; coefficients
/// of total degree above `N` must vanish to `1e-8` relative, which doubles as
/// a self-check of the fit.
pub fn pencil_polynomial<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>) -> Result<BiPoly<T>> {
    check_pair(a1, a2)?;
    let n = a1.n();
    if n == 0 {
        return Ok(BiPoly::constant(-T::one()));
    }
    let inv_or_one = |v: T| if v > T::zero() { T::one() / v } else { T::one() };
    let hx = inv_or_one(a1.matrix().inf_norm());
    let hy = inv_or_one(a2.matrix().inf_norm());
    let m = n + 1;
    let mf = T::from_usize(m).unwrap();
    let nodes: Vec<T> = (0..m)
        .map(|a| (T::PI() * (T::from_usize(a).unwrap() + T::lit(0.5)) / mf).cos())
        .collect();
    let mut f = vec![vec![T::zero(); m]; m];
    let mut fmax = T::zero();
    for (a, &ua) in nodes.iter().enumerate() {
        for (b, &ub) in nodes.iter().enumerate() {
            let v = eval_pencil(a1, a2, cr(ua * hx), cr(ub * hy))?.re;
            fmax = fmax.max(v.abs());
            f[a][b] = v;
        }
    }
    // T_i at the nodes: cos(i * theta_a)
    let tv: Vec<Vec<T>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|a| {
                    let th = T::PI() * (T::from_usize(a).unwrap() + T::lit(0.5)) / mf;
                    (T::from_usize(i).unwrap() * th).cos()
                })
                .collect()
        })
        .collect();
    let mut cheb = vec![vec![T::zero(); m]; m];
    let mut cmax = T::zero();
    for i in 0..m {
        for j in 0..m {
            let mut s = T::zero();
            for a in 0..m {
                let mut inner = T::zero();
                for b in 0..m {
                    inner += f[a][b] * tv[j][b];
                }
                s += inner * tv[i][a];
            }
            let ki = if i == 0 { T::one() } else { T::lit(2.0) };
            let kj = if j == 0 { T::one() } else { T::lit(2.0) };
            cheb[i][j] = s * ki * kj / (mf * mf);
            cmax = cmax.max(cheb[i][j].abs());
        }
    }
    let mut excess = T::zero();
    for i in 0..m {
        for j in 0..m {
            if i + j > n {
                excess = excess.max(cheb[i][j].abs());
            }
        }
    }
    if excess > T::tol(1e-8) * cmax {
        return Err(Error::numerical(format!(
            "pencil fit produced degree > {n} terms of relative size {:e}",
            excess / cmax
        )));
    }
    let tt = chebyshev_table::<T>(n);
    let mut scaled = BiPoly::zero(n);
    for i in 0..m {
        for j in 0..(m - i) {
            let cij = cheb[i][j];
            if cij == T::zero() {
                continue;
            }
            for p in 0..=i {
                if tt[i][p] == T::zero() {
                    continue;
                }
                for q in 0..=j {
                    if tt[j][q] != T::zero() {
                        let old = scaled.get(p, q);
                        scaled.set(p, q, old + cij * tt[i][p] * tt[j][q]);
                    }
                }
            }
        }
    }
    // Off-grid residual check in the scaled variables.
    for &(u, v) in &[(T::lit(0.31), T::lit(-0.67)), (T::lit(-0.83), T::lit(0.12)), (T::lit(0.58), T::lit(0.91))] {
        let want = eval_pencil(a1, a2, cr(u * hx), cr(v * hy))?.re;
        let got = scaled.eval_real(u, v);
        if (want - got).abs() > T::tol(1e-8) * fmax.max(want.abs()) {
            return Err(Error::numerical(format!(
                "pencil fit residual {:e} exceeds tolerance",
                (want - got).abs() / fmax
            )));
        }
    }
    scaled.scale_vars(T::one() / hx, T::one() / hy).normalized()
}

/// A point of `{P = 0}` with the residual `|P|` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint<T> {
    pub x: C<T>,
    pub y: C<T>,
    pub abs_p: T,
}

fn fiber_offsets<T: Real>(half: T) -> [T; 5] {
    let third = half / T::lit(3.0);
    [T::zero(), third, -third, third + third, -(third + third)]
}

/// Samples `{P = 0} ∩ D` by solving `P(., y)` on `resolution` fibers in `y`
/// (real grid plus four imaginary offsets), then the same with `x` and `y`
/// swapped. Points whose residual exceeds `1e-8` of the coefficient norm
/// (scaled by the point size) are dropped.
pub fn curve_samples<T: Real>(p: &BiPoly<T>, disk: &PolyDisk<T>, resolution: usize) -> Result<Vec<CurvePoint<T>>> {
    if resolution < 8 {
        return Err(Error::invalid(format!("resolution must be at least 8, got {resolution}")));
    }
    let cn = p.coef_norm();
    let d = p.degree() as i32;
    let mut out = Vec::new();
    let rho = disk.rho;
    let step = (rho + rho) / T::from_usize(resolution - 1).unwrap();
    for swap in [false, true] {
        let center = if swap { disk.cx } else { disk.cy };
        for k in 0..resolution {
            let re = center - rho + step * T::from_usize(k).unwrap();
            for off in fiber_offsets(rho) {
                let fixed = c(re, off);
                if (fixed - center).norm() > rho {
                    continue;
                }
                let coeffs = if swap { p.fiber_y(fixed) } else { p.fiber_x(fixed) };
                let Ok(rs) = roots(&coeffs) else { continue };
                for r in rs {
                    let (x, y) = if swap { (fixed, r) } else { (r, fixed) };
                    if !disk.contains(x, y) {
                        continue;
                    }
                    let abs_p = p.eval(x, y).norm();
                    let size = T::one().max(x.norm()).max(y.norm()).powi(d);
                    if abs_p <= T::tol(1e-8) * cn * size {
                        out.push(CurvePoint { x, y, abs_p });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Result of a sampled Hausdorff distance computation.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Hausdorff<T> {
    pub distance: T,
    /// Resolution of the final evaluation.
    pub resolution: usize,
    /// Whether the last doubling changed the estimate by less than 10%.
    pub converged: bool,
}

/// Sampled points of `L ∩ D`: a real grid of `resolution` parameters plus four
/// imaginary offsets, kept when inside `D`.
pub fn line_samples<T: Real>(line: &Line<T>, disk: &PolyDisk<T>, resolution: usize) -> Vec<(C<T>, C<T>)> {
    let (f, d) = (line.foot(), line.direction());
    // Parametrize by the coordinate along which the line moves fastest.
    let (t0, half) = if d.0.abs() >= d.1.abs() {
        ((disk.cx - f.0) / d.0, disk.rho / d.0.abs())
    } else {
        ((disk.cy - f.1) / d.1, disk.rho / d.1.abs())
    };
    let step = (half + half) / T::from_usize(resolution.max(2) - 1).unwrap();
    let mut out = Vec::new();
    for k in 0..resolution.max(2) {
        let re = t0 - half + step * T::from_usize(k).unwrap();
        for off in fiber_offsets(half) {
            let t = c(re, off);
            let (x, y) = (t * d.0 + f.0, t * d.1 + f.1);
            if disk.contains(x, y) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Directional Taylor coefficients `(n . grad)^k P / k!` used to solve
/// `P(q + s n) = 0` along the normal through a point `q`.
fn normal_taylor<T: Real>(p: &BiPoly<T>, n: (T, T)) -> Vec<BiPoly<T>> {
    let mut out = vec![p.clone()];
    for k in 1..=p.degree() {
        let prev = &out[k - 1];
        let next = prev.dx().scale(n.0).add(&prev.dy().scale(n.1)).scale(T::one() / T::from_usize(k).unwrap());
        out.push(next);
    }
    out
}

fn hausdorff_once<T: Real>(
    p: &BiPoly<T>,
    taylor: &[BiPoly<T>],
    line: &Line<T>,
    disk: &PolyDisk<T>,
    resolution: usize,
) -> Result<T> {
    let curve = curve_samples(p, disk, resolution)?;
    if curve.is_empty() {
        return Err(Error::pre("the curve {P = 0} has no sampled points in the polydisk"));
    }
    let pts = line_samples(line, disk, resolution);
    if pts.is_empty() {
        return Err(Error::pre("the line has no points in the polydisk"));
    }
    let mut h = curve.iter().fold(T::zero(), |m, cp| m.max(line.distance(cp.x, cp.y)));
    for (x, y) in pts {
        let g: Vec<C<T>> = taylor.iter().map(|t| t.eval(x, y)).collect();
        let near = match roots(&g) {
            Ok(rs) => rs.iter().fold(T::infinity(), |m, s| m.min(s.norm())),
            // P vanishes identically along this normal.
            Err(_) => T::zero(),
        };
        h = h.max(near);
    }
    Ok(h)
}

/// Symmetric Hausdorff distance between `{P = 0} ∩ D` and `L ∩ D`, from
/// samples.
///
/// The curve-to-line direction uses the exact distance to `L`; the
/// line-to-curve direction solves for the nearest zero of `P` along the normal
/// of `L` through each line sample (not restricted to `D`). The resolution is
/// doubled until successive estimates differ by less than 10%, at most four
/// times.
pub fn hausdorff_to_line<T: Real>(p: &BiPoly<T>, line: &Line<T>, disk: &PolyDisk<T>, resolution: usize) -> Result<Hausdorff<T>> {
    let taylor = normal_taylor(p, line.normal());
    let floor = T::tol(1e-13) * T::one().max(disk.rho);
    let mut res = resolution;
    let mut prev = hausdorff_once(p, &taylor, line, disk, res)?;
    for _ in 0..4 {
        let next = hausdorff_once(p, &taylor, line, disk, res * 2)?;
        res *= 2;
        let stable = (next - prev).abs() <= T::lit(0.1) * next.max(prev) || next.max(prev) <= floor;
        prev = next;
        if stable {
            return Ok(Hausdorff { distance: next, resolution: res, converged: true });
        }
    }
    Ok(Hausdorff { distance: prev, resolution: res, converged: false })
}

/// `B1 = c11 A1 + c12 A2`, `B2 = c21 A1 + c22 A2`.
///
/// The pencils then satisfy `P_B(x, y) = P_A(c11 x + c21 y, c12 x + c22 y)`.
pub fn transform_pencil<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, cm: [[T; 2]; 2]) -> Result<(Hermitian<T>, Hermitian<T>)> {
    check_pair(a1, a2)?;
    let det = cm[0][0] * cm[1][1] - cm[0][1] * cm[1][0];
    if !(det.abs() > T::tol(1e-10)) {
        return Err(Error::pre(format!("transform is singular (det = {det:e})")));
    }
    let b1 = a1.scale(cm[0][0]).add(&a2.scale(cm[0][1]));
    let b2 = a1.scale(cm[1][0]).add(&a2.scale(cm[1][1]));
    Ok((b1, b2))
}

/// How line multiplicity in a pencil spectrum is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ContainmentRoute {
    /// Fit the determinant polynomial and count line factors.
    Polynomial,
    /// Count near-zero eigenvalues of `x A1 + y A2 - I` at sample points of
    /// the line; the minimum over samples is the multiplicity.
    Spectral,
}

/// Largest dimension for which [`line_multiplicity`] fits the polynomial by
/// default; bigger pencils use the spectral route.
pub const POLYNOMIAL_ROUTE_MAX_DIM: usize = 10;

/// Picks the polynomial route for small pencils.
pub fn default_route(n: usize) -> ContainmentRoute {
    if n <= POLYNOMIAL_ROUTE_MAX_DIM {
        ContainmentRoute::Polynomial
    } else {
        ContainmentRoute::Spectral
    }
}

/// Spectral-route multiplicity: the smallest number, over five real sample
/// points of `L`, of eigenvalues of the pencil matrix within
/// `tol * (|x| ||A1|| + |y| ||A2|| + 1)` of zero.
pub fn spectral_line_multiplicity<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, line: &Line<T>, tol: T) -> Result<usize> {
    check_pair(a1, a2)?;
    let (n1, n2) = (a1.norm()?, a2.norm()?);
    let (f, d) = (line.foot(), line.direction());
    let sigma = T::one() / line.normal_len();
    let mut best = usize::MAX;
    for &t in &[-0.83, -0.41, 0.17, 0.56, 0.93] {
        let t = T::lit(t) * sigma;
        let (x, y) = (f.0 + t * d.0, f.1 + t * d.1);
        let m = Hermitian::symmetrized(pencil_matrix(a1, a2, cr(x), cr(y)));
        let scale = x.abs() * n1 + y.abs() * n2 + T::one();
        let count = m.eigenvalues()?.iter().filter(|e| e.abs() <= tol * scale).count();
        best = best.min(count);
    }
    Ok(best)
}

/// Multiplicity of `L` in the joint spectrum of `(A1, A2)` by the chosen route.
pub fn line_multiplicity<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    line: &Line<T>,
    route: ContainmentRoute,
    poly_tol: T,
    spectral_tol: T,
) -> Result<usize> {
    match route {
        ContainmentRoute::Polynomial => {
            // count in norm-balanced variables so no coordinate dominates the coefficient norm
            let inv_or_one = |v: T| if v > T::zero() { T::one() / v } else { T::one() };
            let hx = inv_or_one(a1.matrix().inf_norm());
            let hy = inv_or_one(a2.matrix().inf_norm());
            let p = pencil_polynomial(a1, a2)?.scale_vars(hx, hy);
            line_containment(&p, &Line::new(line.alpha * hx, line.beta * hy)?, poly_tol)
        }
        ContainmentRoute::Spectral => spectral_line_multiplicity(a1, a2, line, spectral_tol),
    }
}
