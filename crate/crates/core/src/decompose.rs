//! Deciding and certifying common invariant subspaces of Hermitian pairs.
//!
//! Two tests are provided: a line criterion for a common eigenspace of `A1`
//! at an eigenvalue `lam`, and a curve criterion that reduces a degree-`k`
//! component of the joint spectrum to lines in the spectra of exterior
//! powers. Contour residues of the resolvent give necessary conditions.

use crate::error::{Error, Result};
use crate::exterior::{binomial, complementary_power, exterior_power_hermitian, is_generic_multiset, SpectralMultiset};
use crate::matrix::{CMatrix, Hermitian};
use crate::pencil::{default_route, hausdorff_to_line, line_multiplicity, pencil_matrix, pencil_polynomial, ContainmentRoute};
use crate::poly::{BiPoly, Line, PolyDisk};
use crate::roots::roots;
use crate::scalar::{c, cr, Real, C};

/// Outcome of a decomposability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    /// Process exit code: 0 yes, 1 no, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// One line-containment check of a test.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LineCheck<T> {
    pub line: Line<T>,
    /// Which pencil the line was tested against.
    pub pencil: String,
    pub multiplicity: usize,
    pub required: usize,
    pub route: ContainmentRoute,
}

impl<T> LineCheck<T> {
    pub fn passed(&self) -> bool {
        self.multiplicity >= self.required
    }
}

/// Report of [`common_eigenspace_test`] and [`curve_decomposability_test`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct DecompositionReport<T: Real> {
    pub verdict: Verdict,
    /// Dimension of the candidate subspace.
    pub k: usize,
    /// Orthonormal columns spanning the candidate subspace.
    pub basis: CMatrix<T>,
    /// `||(I - P) B P||` for the candidate subspace.
    pub invariance_residual: T,
    pub line_checks: Vec<LineCheck<T>>,
    pub genericity: bool,
    /// Shift or perturbation parameters applied before the line checks.
    pub adjustments: Vec<(String, T)>,
    /// Sampled distance of the spectrum to the tested line near the axis point.
    pub hausdorff: Option<T>,
    pub notes: Vec<String>,
}

/// Tolerances and switches for the decomposability tests.
#[derive(Clone, Debug)]
pub struct DecomposeOptions<T> {
    /// Relative coefficient tolerance of polynomial line containment.
    pub tol_contain: T,
    /// Relative invariance residual accepted for a yes verdict.
    pub tol_resid: T,
    /// Relative eigenvalue tolerance of the spectral containment route.
    pub tol_spectral: T,
    /// Relative singular-value tolerance of the divisibility check of `Gamma`.
    pub tol_divide: T,
    /// Containment route; chosen by pencil size when `None`.
    pub route: Option<ContainmentRoute>,
    /// Shift `A + dI`, `B + dI` when `A` is singular, an axis meets the curve
    /// at infinity, or genericity fails at the unshifted pair.
    pub auto_shift: bool,
    /// Gap of the genericity test; `1e-6 (1 + |lambda|)` when `None`.
    pub gap_tol: Option<T>,
    /// Resolution of the Hausdorff diagnostic of the line test.
    pub resolution: usize,
}

impl<T: Real> Default for DecomposeOptions<T> {
    fn default() -> Self {
        DecomposeOptions {
            tol_contain: T::tol(1e-7),
            tol_resid: T::tol(1e-8),
            tol_spectral: T::tol(1e-9),
            tol_divide: T::tol(1e-4),
            route: None,
            auto_shift: true,
            gap_tol: None,
            resolution: 32,
        }
    }
}

fn spectral_scale<T: Real>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Orthogonal projection onto an eigenspace, with its basis.
#[derive(Clone, Debug)]
pub struct Eigenspace<T: Real> {
    pub projector: CMatrix<T>,
    pub basis: CMatrix<T>,
    pub values: Vec<T>,
}

/// Projection onto the span of eigenvectors with `|lambda_j - lam| <= cluster_tol`
/// (`1e-8 ||A||` when `None`).
pub fn eigenspace_projection<T: Real>(a: &Hermitian<T>, lam: T, cluster_tol: Option<T>) -> Result<Eigenspace<T>> {
    let e = a.eigen()?;
    let tol = cluster_tol.unwrap_or_else(|| T::tol(1e-8) * spectral_scale(&e.values));
    let idx: Vec<usize> = (0..e.values.len()).filter(|&j| (e.values[j] - lam).abs() <= tol).collect();
    if idx.is_empty() {
        let near = e.values[e.nearest(lam)];
        return Err(Error::pre(format!("{lam} is not an eigenvalue (nearest is {near}, tolerance {tol:e})")));
    }
    let basis = CMatrix::from_columns(&idx.iter().map(|&j| e.vectors.column(j)).collect::<Vec<_>>());
    let projector = &basis * &basis.adjoint();
    Ok(Eigenspace { projector, basis, values: idx.iter().map(|&j| e.values[j]).collect() })
}

/// The reduced resolvent `T = sum_{mu != lam} lam / (mu - lam) P_mu`.
///
/// Eigenvalues within `1e-8 ||A||` of `lam` form the excluded cluster.
pub fn t_operator<T: Real>(a: &Hermitian<T>, lam: T) -> Result<CMatrix<T>> {
    let e = a.eigen()?;
    let tol = T::tol(1e-8) * spectral_scale(&e.values);
    if e.values.iter().all(|&v| (v - lam).abs() > tol) {
        let near = e.values[e.nearest(lam)];
        return Err(Error::pre(format!(
            "{lam} is not an eigenvalue: nearest eigenvalue {near} is {:e} away",
            (near - lam).abs()
        )));
    }
    Ok(e.function(|mu| if (mu - lam).abs() <= tol { cr(T::zero()) } else { cr(lam / (mu - lam)) }))
}

/// Residual norms of the line conditions, see [`line_residue_check`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LineResidues<T> {
    pub r1: T,
    pub r3: T,
    /// Absent when `A1` is singular.
    pub r3_inv: Option<T>,
}

/// With `A1' = A1 / lam`, `A2' = A2 / a`: `r1 = ||P1 A2' P1 - P1||`,
/// `r3 = ||P1 A2' T(A1') A2' P1||` and `r3_inv` the same with `T(A1'^-1)`.
/// All vanish when the line `{lam x + a y = 1}` comes from a common eigenspace.
pub fn line_residue_check<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, lam: T, a: T) -> Result<LineResidues<T>> {
    if lam == T::zero() || a == T::zero() {
        return Err(Error::invalid("line_residue_check needs lam != 0 and a != 0"));
    }
    let h1 = a1.scale(T::one() / lam);
    let h2 = a2.scale(T::one() / a);
    let p1 = eigenspace_projection(&h1, T::one(), None)?.projector;
    let t = t_operator(&h1, T::one())?;
    let m2 = h2.matrix();
    let r1 = (&(&(&p1 * m2) * &p1) - &p1).spectral_norm()?;
    let sandwich = |t: &CMatrix<T>| (&(&(&(&p1 * m2) * t) * m2) * &p1).spectral_norm();
    let r3 = sandwich(&t)?;
    let r3_inv = match h1.matrix().inverse() {
        Ok(inv) if h1.eigenvalues()?.iter().all(|v| v.abs() > T::tol(1e-12) * h1.norm().unwrap_or(T::one())) => {
            let inv = Hermitian::symmetrized(inv);
            Some(sandwich(&t_operator(&inv, T::one())?)?)
        }
        _ => None,
    };
    Ok(LineResidues { r1, r3, r3_inv })
}

/// Circle `|w - center| = radius` discretized with `nodes` trapezoidal nodes.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ContourSpec<T> {
    pub center: T,
    pub radius: T,
    pub nodes: usize,
}

impl<T: Real> ContourSpec<T> {
    /// Circle about 1 for `sigma(A1 / lam)` with radius half the distance to
    /// the rest of the spectrum.
    pub fn around(a1: &Hermitian<T>, lam: T, nodes: usize) -> Result<Self> {
        if lam == T::zero() {
            return Err(Error::invalid("lam must be nonzero"));
        }
        let w: Vec<T> = a1.eigenvalues()?.iter().map(|&v| v / lam).collect();
        let tol = T::tol(1e-8) * spectral_scale(&w).max(T::one());
        let gap = w
            .iter()
            .map(|&v| (v - T::one()).abs())
            .filter(|&d| d > tol)
            .fold(T::infinity(), T::min);
        let radius = if gap.is_finite() { gap * T::lit(0.5) } else { T::lit(0.5) };
        Ok(ContourSpec { center: T::one(), radius, nodes })
    }

    /// Rejects spectra with a point in the annulus `[0.5 r, 1.5 r]` around the
    /// circle.
    pub fn validate(&self, spectrum: &[T]) -> Result<()> {
        if !(self.radius > T::zero()) || self.nodes < 4 {
            return Err(Error::invalid("contour needs positive radius and at least 4 nodes"));
        }
        let half = self.radius * T::lit(0.5);
        for &w in spectrum {
            if ((w - self.center).abs() - self.radius).abs() < half {
                return Err(Error::pre(format!(
                    "eigenvalue {w} lies within {half:e} of the contour |w - {}| = {}",
                    self.center, self.radius
                )));
            }
        }
        Ok(())
    }
}

/// `(1 / 2 pi i) \oint Psi_m(w) dw` by the trapezoidal rule.
///
/// `Psi_m(w) = R(w) (P(w) B^K - sum_{n=1}^K c_n(w) B^(K-n)) B^(m-K)` with
/// `R(w) = (w I - A1 / lam)^-1`, `B = A2 R(w)`, `K = min(m, k)`,
/// `P(w) = w^k - sum_j w^(k-j) r^j_j / lam^j` and
/// `c_n(w) = sum_{j >= n} w^(k-j) r^j_(j-n) / lam^(j-n)`, where `r^j_i` is the
/// coefficient of `x^i y^(j-i)` in `R`. `R` is rescaled to constant term `-1`.
pub fn psi_residue_matrix<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    r: &BiPoly<T>,
    m: usize,
    lam: T,
    contour: &ContourSpec<T>,
) -> Result<CMatrix<T>> {
    if m < 1 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if a1.n() != a2.n() {
        return Err(Error::invalid("dimension mismatch"));
    }
    if lam == T::zero() {
        return Err(Error::invalid("lam must be nonzero"));
    }
    let r = r.normalized()?;
    let k = r.effective_degree(T::tol(1e-14));
    let r = r.truncate(k);
    let e = a1.eigen()?;
    let w: Vec<T> = e.values.iter().map(|&v| v / lam).collect();
    contour.validate(&w)?;
    let n = a1.n();
    let v = &e.vectors;
    let b0 = &(&v.adjoint() * a2.matrix()) * v;
    let coef = |j: usize, i: usize| r.get(i, j - i);
    let kk = m.min(k);
    let tail = m - kk;
    let mf = T::from_usize(contour.nodes).unwrap();
    let mut acc = CMatrix::zeros(n, n);
    for t in 0..contour.nodes {
        let th = T::lit(2.0) * T::PI() * T::from_usize(t).unwrap() / mf;
        let z = c(th.cos(), th.sin()) * contour.radius;
        let wn = z + contour.center;
        let rd: Vec<C<T>> = w.iter().map(|&wj| (wn - wj).inv()).collect();
        let b = CMatrix::from_fn(n, n, |i, j| b0[(i, j)] * rd[j]);
        let mut pows = vec![CMatrix::identity(n)];
        for p in 1..=kk.max(tail) {
            pows.push(&pows[p - 1] * &b);
        }
        let wp = |e: usize| wn.powi(e as i32);
        let mut pw = wp(k);
        let mut lp = cr(T::one());
        for j in 1..=k {
            lp *= lam;
            pw -= wp(k - j) * (lp.inv() * coef(j, j));
        }
        let mut s = pows[kk].scale(pw);
        for nn in 1..=kk {
            let mut cn = cr(T::zero());
            for j in nn..=k {
                cn += wp(k - j) * (coef(j, j - nn) / lam.powi((j - nn) as i32));
            }
            s = &s - &pows[kk - nn].scale(cn);
        }
        let mut psi = CMatrix::from_fn(n, n, |i, j| rd[i] * s[(i, j)]);
        if tail > 0 {
            psi = &psi * &pows[tail];
        }
        acc = &acc + &psi.scale(z / mf);
    }
    Ok(&(v * &acc) * &v.adjoint())
}

/// Operator norm of [`psi_residue_matrix`].
pub fn psi_residue<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    r: &BiPoly<T>,
    m: usize,
    lam: T,
    contour: &ContourSpec<T>,
) -> Result<T> {
    psi_residue_matrix(a1, a2, r, m, lam, contour)?.spectral_norm()
}

/// Closed forms of the first two residues for the line `R = lam x + a y - 1`:
/// `Res Psi_1 = P1 A2 P1 - a P1` and
/// `Res Psi_2 = -P1 A2 T A2 P1 - P1 (A2 P1 - a I) A2 T - T (A2 P1 - a I) A2 P1`.
pub fn line_residue_closed_forms<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, lam: T, a: T) -> Result<(CMatrix<T>, CMatrix<T>)> {
    let p1 = eigenspace_projection(a1, lam, None)?.projector;
    let t = t_operator(a1, lam)?;
    let m2 = a2.matrix();
    let n = a1.n();
    let res1 = &(&(&p1 * m2) * &p1) - &p1.scale_re(a);
    let x = &(m2 * &p1) - &CMatrix::identity(n).scale_re(a);
    let first = &(&(&(&p1 * m2) * &t) * m2) * &p1;
    let second = &(&(&p1 * &x) * m2) * &t;
    let third = &(&(&t * &x) * m2) * &p1;
    let res2 = &(&first.scale_re(-T::one()) - &second) - &third;
    Ok((res1, res2))
}

/// `||(I - P) B P||` for `P` the projection onto the span of `basis`.
pub fn verify_invariant_subspace<T: Real>(b: &Hermitian<T>, basis: &CMatrix<T>) -> Result<T> {
    if basis.rows() != b.n() {
        return Err(Error::invalid(format!("basis has {} rows, matrix is {}x{}", basis.rows(), b.n(), b.n())));
    }
    let gram = &basis.adjoint() * basis;
    let defect = (&gram - &CMatrix::identity(basis.cols())).max_abs();
    if defect > T::tol(1e-10) {
        return Err(Error::invalid(format!("basis columns are not orthonormal (defect {defect:e})")));
    }
    let w = b.matrix() * basis;
    let resid = &w - &(basis * &(&basis.adjoint() * &w));
    resid.spectral_norm()
}

/// Largest principal angle between the column spans of two orthonormal bases.
pub fn principal_angle<T: Real>(q1: &CMatrix<T>, q2: &CMatrix<T>) -> Result<T> {
    if q1.cols() != q2.cols() {
        return Ok(T::FRAC_PI_2());
    }
    let resid = q1 - &(q2 * &(&q2.adjoint() * q1));
    Ok(resid.spectral_norm()?.min(T::one()).asin())
}

fn multiplicity_check<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    line: Line<T>,
    label: &str,
    required: usize,
    opts: &DecomposeOptions<T>,
) -> Result<LineCheck<T>> {
    let route = opts.route.unwrap_or_else(|| default_route(a1.n()));
    let multiplicity = line_multiplicity(a1, a2, &line, route, opts.tol_contain, opts.tol_spectral)?;
    Ok(LineCheck { line, pencil: label.to_string(), multiplicity, required, route })
}

/// Whether the eigenspace of `A1` at `lam` is invariant for `A2`, decided by
/// the lines `{lam x + a y = 1}` in `sigma(A1, A2)` and `{x / lam + a y = 1}`
/// in `sigma(A1^-1, A2)`, and confirmed by the residual `||A2 P1 - P1 A2 P1||`.
///
/// A singular `A1` is replaced by `(1 + e) A1 - lam e I` (and `A2` by
/// `(1 + e) A2 - a e I`), which keeps the line and the eigenvectors.
pub fn common_eigenspace_test<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    lam: T,
    a: T,
    rho: T,
    opts: &DecomposeOptions<T>,
) -> Result<DecompositionReport<T>> {
    if a1.n() != a2.n() {
        return Err(Error::invalid("dimension mismatch"));
    }
    if lam == T::zero() {
        return Err(Error::pre("lam must be a nonzero eigenvalue"));
    }
    let ev = a1.eigenvalues()?;
    let scale = spectral_scale(&ev);
    let space = eigenspace_projection(a1, lam, None)?;
    let rank = space.basis.cols();
    let mut notes = Vec::new();
    let mut adjustments = Vec::new();

    let min_abs = ev.iter().fold(T::infinity(), |m, v| m.min(v.abs()));
    let (b1, b2) = if min_abs <= T::tol(1e-10) * scale {
        if !opts.auto_shift {
            return Err(Error::pre("A1 is singular; apply the perturbation (1+e)A1 - lam e I first"));
        }
        let mut best = (T::zero(), -T::one());
        for e in [1.0, 2.0, 0.5, 3.0, -0.5, 4.0] {
            let e = T::lit(e);
            let q = ev.iter().map(|&v| ((T::one() + e) * v - lam * e).abs()).fold(T::infinity(), T::min)
                / ev.iter().map(|&v| ((T::one() + e) * v - lam * e).abs()).fold(T::zero(), T::max);
            if q > best.1 {
                best = (e, q);
            }
            if q >= T::lit(1e-3) {
                break;
            }
        }
        let e = best.0;
        notes.push(format!("A1 is singular; tested the perturbed pair with e = {e}"));
        adjustments.push(("perturb_eps".to_string(), e));
        (a1.perturb(e, lam), a2.perturb(e, a))
    } else {
        (a1.clone(), a2.clone())
    };

    let direct = multiplicity_check(&b1, &b2, Line::new(lam, a)?, "(A1, A2)", rank, opts)?;
    let inv = Hermitian::symmetrized(b1.matrix().inverse()?);
    let inverse = multiplicity_check(&inv, &b2, Line::new(T::one() / lam, a)?, "(A1^-1, A2)", rank, opts)?;

    let p = &space.projector;
    let m2 = a2.matrix();
    let residual = (&(m2 * p) - &(&(p * m2) * p)).spectral_norm()?;
    let resid_ok = residual <= opts.tol_resid * a2.norm()?.max(T::min_positive_value());

    let lines_ok = direct.passed() && inverse.passed();
    let verdict = if lines_ok && resid_ok { Verdict::Yes } else { Verdict::No };
    if !direct.passed() {
        notes.push("line {lam x + a y = 1} is not in the spectrum of (A1, A2)".to_string());
    }
    if !inverse.passed() {
        notes.push("line {x/lam + a y = 1} is not in the spectrum of (A1^-1, A2)".to_string());
    }
    if lines_ok && !resid_ok {
        notes.push(format!("both lines found but the invariance residual {residual:e} is above tolerance"));
    }
    if !lines_ok && resid_ok {
        notes.push("invariance residual is small although a line check failed; tolerances may be too tight".to_string());
    }
    let hausdorff = (|| -> Result<T> {
        let p = pencil_polynomial(a1, a2)?;
        let disk = PolyDisk::new(T::one() / lam, T::zero(), rho)?;
        Ok(hausdorff_to_line(&p, &Line::new(lam, a)?, &disk, opts.resolution)?.distance)
    })()
    .ok();
    Ok(DecompositionReport {
        verdict,
        k: rank,
        basis: space.basis,
        invariance_residual: residual,
        line_checks: vec![direct, inverse],
        genericity: true,
        adjustments,
        hausdorff,
        notes,
    })
}

/// Largest relative smallest-singular-value of the pencil over sample points
/// of `{Gamma = 0}`; near zero when `Gamma` divides the pencil determinant.
pub fn divisibility_residual<T: Real>(a: &Hermitian<T>, b: &Hermitian<T>, gamma: &BiPoly<T>) -> Result<T> {
    let (na, nb) = (a.norm()?, b.norm()?);
    let inv = |v: T| if v > T::zero() { T::one() / v } else { T::one() };
    let mut worst = T::zero();
    let mut count = 0;
    for swap in [false, true] {
        let s = if swap { inv(na) } else { inv(nb) };
        for f in [-0.83, -0.37, 0.21, 0.58, 0.94] {
            let fixed = cr(T::lit(f) * s);
            let coeffs = if swap { gamma.fiber_y(fixed) } else { gamma.fiber_x(fixed) };
            let Ok(rs) = roots(&coeffs) else { continue };
            for r in rs {
                let (x, y) = if swap { (fixed, r) } else { (r, fixed) };
                let size = x.norm() * na + y.norm() * nb + T::one();
                if size > T::lit(1e6) {
                    continue;
                }
                let sv = pencil_matrix(a, b, x, y).min_singular_value()?;
                worst = worst.max(sv / size);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::pre("Gamma has no finite sample points on the axis-parallel fibers"));
    }
    Ok(worst)
}

/// Reciprocals of the `k` finite roots of a real univariate polynomial, or
/// `None` when it has fewer than `k` roots of modulus at most `limit`.
fn axis_reciprocals<T: Real>(coeffs: &[T], k: usize, limit: T) -> Option<Vec<C<T>>> {
    let cc: Vec<C<T>> = coeffs.iter().map(|&v| cr(v)).collect();
    let rs = roots(&cc).ok()?;
    if rs.len() != k || rs.iter().any(|r| r.norm() > limit || r.norm() == T::zero()) {
        return None;
    }
    Some(rs.iter().map(|r| r.inv()).collect())
}

/// Matches values to eigenvalues (each used once) and returns the indices.
fn match_eigenvalues<T: Real>(ev: &[T], values: &[C<T>], tol: T) -> Result<Vec<usize>> {
    let mut used = vec![false; ev.len()];
    let mut out = Vec::new();
    for v in values {
        if v.im.abs() > tol {
            return Err(Error::pre(format!("axis intersection 1/{v} is not real, so Gamma is not a spectral component")));
        }
        let best = (0..ev.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (ev[i] - v.re).abs().partial_cmp(&(ev[j] - v.re).abs()).unwrap());
        match best {
            Some(j) if (ev[j] - v.re).abs() <= tol => {
                used[j] = true;
                out.push(j);
            }
            _ => {
                return Err(Error::pre(format!(
                    "Gamma meets the x-axis at 1/{}, which is not the reciprocal of an unused eigenvalue",
                    v.re
                )))
            }
        }
    }
    Ok(out)
}

fn shift_candidates<T: Real>(scale: T) -> Vec<T> {
    let s = if scale > T::zero() { scale } else { T::one() };
    [0.0, 0.5, -0.5, 0.25, -0.25, 1.0, -1.0, 0.75, -0.75, 2.0, -2.0, 0.375, -0.375]
        .iter()
        .map(|&v| T::lit(v) * s)
        .collect()
}

/// Whether the degree-`k` component `{Gamma = 0}` of `sigma(A, B)` comes from a
/// `k`-dimensional common invariant subspace.
///
/// With `lambda_i`, `mu_i` the reciprocal axis intersections of `Gamma`,
/// `lambda = prod lambda_i` and `mu = prod mu_i`, the test checks the line
/// `{lambda x + mu y = 1}` in `sigma(^k A, ^k B)` and
/// `{(det A / lambda) x + mu y = 1}` in `sigma(^(N-k) A, ^k B)`, then
/// certifies the span of the matching `A`-eigenvectors. Genericity failure of
/// `{lambda_i}` makes the verdict inconclusive.
///
/// When `A` is singular or an axis meets `Gamma` at infinity, `A + dA I` and
/// `B + dB I` are used with `Gamma` moved by the matching projective shift
/// (see [`BiPoly::projective_shift`]); the shifts are listed in the report.
pub fn curve_decomposability_test<T: Real>(
    a: &Hermitian<T>,
    b: &Hermitian<T>,
    k: usize,
    gamma: &BiPoly<T>,
    opts: &DecomposeOptions<T>,
) -> Result<DecompositionReport<T>> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::invalid("dimension mismatch"));
    }
    if k < 1 || k > n {
        return Err(Error::invalid(format!("k = {k} outside 1..={n}")));
    }
    let deg = gamma.effective_degree(T::tol(1e-10));
    if deg != k {
        return Err(Error::invalid(format!("Gamma has total degree {deg}, expected {k}")));
    }
    let gamma = gamma.truncate(k).normalized()?;
    let div = divisibility_residual(a, b, &gamma)?;
    if div > opts.tol_divide {
        return Err(Error::pre(format!(
            "Gamma does not divide the pencil determinant (relative singular value {div:e} on Gamma)"
        )));
    }
    let mut notes = vec![format!("divisibility residual {div:e}")];
    let (na, nb) = (a.norm()?, b.norm()?);

    if k == n {
        let ev = a.eigenvalues()?;
        let det_a = ev.iter().fold(T::one(), |p, &v| p * v);
        let det_b = b.eigenvalues()?.iter().fold(T::one(), |p, &v| p * v);
        let lx: Vec<T> = (0..=k).map(|i| gamma.get(i, 0)).collect();
        let ly: Vec<T> = (0..=k).map(|j| gamma.get(0, j)).collect();
        let lim = T::lit(1e8);
        match (axis_reciprocals(&lx, k, lim / na.max(T::min_positive_value())), axis_reciprocals(&ly, k, lim / nb.max(T::min_positive_value()))) {
            (Some(lr), Some(mr)) => {
                let lam = lr.iter().fold(cr(T::one()), |p, &v| p * v);
                let mu = mr.iter().fold(cr(T::one()), |p, &v| p * v);
                let ok = (lam.re - det_a).abs() <= T::tol(1e-6) * det_a.abs().max(T::one())
                    && (mu.re - det_b).abs() <= T::tol(1e-6) * det_b.abs().max(T::one());
                notes.push(format!("k = N: lambda = {} vs det A = {det_a}, mu = {} vs det B = {det_b}", lam.re, mu.re));
                if !ok {
                    return Err(Error::numerical("k = N but the axis products disagree with the determinants"));
                }
            }
            _ => notes.push("k = N with a singular axis; determinant consistency skipped".to_string()),
        }
        return Ok(DecompositionReport {
            verdict: Verdict::Yes,
            k,
            basis: CMatrix::identity(n),
            invariance_residual: T::zero(),
            line_checks: Vec::new(),
            genericity: true,
            adjustments: Vec::new(),
            hausdorff: None,
            notes,
        });
    }

    let cand_a = shift_candidates(na);
    let cand_b = shift_candidates(nb);
    let mut nongeneric = None;
    let mut chosen = None;
    'outer: for (ia, &da) in cand_a.iter().enumerate() {
        if ia > 0 && !opts.auto_shift {
            break;
        }
        let ash = a.shift(da);
        let ev = ash.eigenvalues()?;
        let sa = spectral_scale(&ev);
        if ev.iter().any(|v| v.abs() <= T::tol(1e-8) * sa) {
            continue;
        }
        let ga = gamma.projective_shift(da, T::zero());
        let lx: Vec<T> = (0..=k).map(|i| ga.get(i, 0)).collect();
        let Some(lrec) = axis_reciprocals(&lx, k, T::lit(1e8) / sa) else { continue };
        let idx = match_eigenvalues(&ev, &lrec, T::tol(1e-6) * sa)?;
        let lams: Vec<T> = idx.iter().map(|&j| ev[j]).collect();
        let gen = is_generic_multiset(&ash, &SpectralMultiset::new(lams.clone()), opts.gap_tol)?;
        if !gen.generic {
            nongeneric.get_or_insert((da, gen));
            continue;
        }
        for (ib, &db) in cand_b.iter().enumerate() {
            if ib > 0 && !opts.auto_shift {
                break;
            }
            let bsh = b.shift(db);
            let gab = gamma.projective_shift(da, db);
            let ly: Vec<T> = (0..=k).map(|j| gab.get(0, j)).collect();
            let sb = bsh.norm()?.max(T::min_positive_value());
            let Some(mrec) = axis_reciprocals(&ly, k, T::lit(1e8) / sb) else { continue };
            if mrec.iter().any(|m| m.im.abs() > T::tol(1e-6) * m.norm().max(T::one())) {
                return Err(Error::pre("Gamma meets the y-axis at non-real points, so it is not a spectral component"));
            }
            chosen = Some((da, db, ash, bsh, ev, idx, lams, mrec));
            break 'outer;
        }
    }
    let Some((da, db, ash, bsh, ev, idx, lams, mrec)) = chosen else {
        if let Some((da, gen)) = nongeneric {
            notes.push(format!(
                "multiset product {} is attained by {} eigenvalue subsets (gap {:e}, shift {da})",
                gen.product,
                gen.matches.len(),
                gen.gap_tol
            ));
            let e = ash_basis(a, &gen.matches[0].0)?;
            let invariance_residual = verify_invariant_subspace(b, &e)?;
            return Ok(DecompositionReport {
                verdict: Verdict::Inconclusive,
                k,
                basis: e,
                invariance_residual,
                line_checks: Vec::new(),
                genericity: false,
                adjustments: vec![("shift_a".to_string(), da)],
                hausdorff: None,
                notes,
            });
        }
        return Err(Error::pre(
            "Gamma(x,0) or Gamma(0,y) has fewer than k finite roots for every tried shift; \
             apply a linear change of coordinates",
        ));
    };

    let lambda = lams.iter().fold(T::one(), |p, &v| p * v);
    let mu = mrec.iter().fold(T::one(), |p, m| p * m.re);
    let complement = (0..n).filter(|j| !idx.contains(j)).fold(T::one(), |p, j| p * ev[j]);
    let ext_a = exterior_power_hermitian(&ash, k)?;
    let ext_b = exterior_power_hermitian(&bsh, k)?;
    let comp_a = complementary_power(&ash, k)?;
    let mut local = opts.clone();
    local.route = Some(opts.route.unwrap_or_else(|| default_route(binomial(n, k))));
    let first = multiplicity_check(&ext_a, &ext_b, Line::new(lambda, mu)?, "(^k A, ^k B)", 1, &local)?;
    let second = multiplicity_check(&comp_a, &ext_b, Line::new(complement, mu)?, "(^(N-k) A, ^k B)", 1, &local)?;

    let basis = CMatrix::from_columns(&idx.iter().map(|&j| ash.eigen().map(|e| e.vectors.column(j))).collect::<Result<Vec<_>>>()?);
    let basis = orthonormal(basis);
    let invariance_residual = verify_invariant_subspace(b, &basis)?;
    let resid_ok = invariance_residual <= opts.tol_resid * nb.max(T::min_positive_value());
    let lines_ok = first.passed() && second.passed();
    if !first.passed() {
        notes.push("line {lambda x + mu y = 1} is not in the spectrum of the k-th exterior powers".to_string());
    }
    if !second.passed() {
        notes.push("line {(det A/lambda) x + mu y = 1} is not in the spectrum of (^(N-k) A, ^k B)".to_string());
    }
    if lines_ok && !resid_ok {
        notes.push(format!("both lines found but the invariance residual {invariance_residual:e} is above tolerance"));
    }
    let mut adjustments = Vec::new();
    if da != T::zero() {
        adjustments.push(("shift_a".to_string(), da));
    }
    if db != T::zero() {
        adjustments.push(("shift_b".to_string(), db));
    }
    Ok(DecompositionReport {
        verdict: if lines_ok && resid_ok { Verdict::Yes } else { Verdict::No },
        k,
        basis,
        invariance_residual,
        line_checks: vec![first, second],
        genericity: true,
        adjustments,
        hausdorff: None,
        notes,
    })
}

fn ash_basis<T: Real>(a: &Hermitian<T>, idx: &[usize]) -> Result<CMatrix<T>> {
    let e = a.eigen()?;
    Ok(orthonormal(CMatrix::from_columns(&idx.iter().map(|&j| e.vectors.column(j)).collect::<Vec<_>>())))
}

fn orthonormal<T: Real>(m: CMatrix<T>) -> CMatrix<T> {
    let mut cols: Vec<Vec<C<T>>> = (0..m.cols()).map(|j| m.column(j)).collect();
    crate::matrix::orthonormalize(&mut cols, T::zero());
    CMatrix::from_columns(&cols)
}

/// First and second derivatives of the implicit branch `x(y)` of `P = 0`
/// through `(x0, 0)`.
pub fn implicit_derivatives<T: Real>(p: &BiPoly<T>, x0: T) -> Result<(T, T)> {
    let size = p.coef_norm() * T::one().max(x0.abs()).powi(p.degree() as i32);
    let v = p.eval_real(x0, T::zero());
    if v.abs() > T::tol(1e-8) * size {
        return Err(Error::pre(format!("({x0}, 0) is not on the curve: |P| = {:e}", v.abs())));
    }
    let (px, py) = (p.dx(), p.dy());
    let fx = px.eval_real(x0, T::zero());
    if fx.abs() <= T::tol(1e-10) * size {
        return Err(Error::pre(format!("({x0}, 0) is a singular point: dP/dx = {fx:e}")));
    }
    let fy = py.eval_real(x0, T::zero());
    let fxx = px.dx().eval_real(x0, T::zero());
    let fxy = px.dy().eval_real(x0, T::zero());
    let fyy = py.dy().eval_real(x0, T::zero());
    let s = fy / fx;
    let d1 = -s;
    let d2 = -(fxx * s * s - T::lit(2.0) * fxy * s + fyy) / fx;
    Ok((d1, d2))
}

/// Result of [`first_moments_check`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FirstMoments<T> {
    /// `x'(0)` of the branch through `(1, 0)` of the pencil of `(A1 / lam, A2)`.
    pub dx: T,
    /// `x''(0)`.
    pub d2x: T,
    /// `||P1 A2 P1 + x'(0) P1||`.
    pub first: T,
    /// `||P1 A2 T A2 P1 - (x''(0) / 2) P1||`.
    pub second: T,
}

/// Compares the first two moments of `A2` at a simple eigenvalue `lam` of
/// `A1` with the curvature of the spectral curve through `(1/lam, 0)`:
/// `P1 A2 P1 = -x'(0) P1` and `P1 A2 T A2 P1 = (x''(0) / 2) P1`.
pub fn first_moments_check<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, lam: T) -> Result<FirstMoments<T>> {
    if lam == T::zero() {
        return Err(Error::pre("lam must be nonzero"));
    }
    let space = eigenspace_projection(a1, lam, None)?;
    if space.basis.cols() != 1 {
        return Err(Error::pre(format!("{lam} has multiplicity {}, expected 1", space.basis.cols())));
    }
    let lam = space.values[0];
    let h1 = a1.scale(T::one() / lam);
    let p = pencil_polynomial(&h1, a2)?;
    let (dx, d2x) = implicit_derivatives(&p, T::one())?;
    let p1 = &space.projector;
    let t = t_operator(a1, lam)?;
    let m2 = a2.matrix();
    let first = (&(&(p1 * m2) * p1) + &p1.scale_re(dx)).spectral_norm()?;
    let sandwich = &(&(&(p1 * m2) * &t) * m2) * p1;
    let second = (&sandwich - &p1.scale_re(d2x * T::lit(0.5))).spectral_norm()?;
    Ok(FirstMoments { dx, d2x, first, second })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intro() -> (Hermitian<f64>, Hermitian<f64>) {
        let a1 = Hermitian::diag(&[1.0, 5.0, 0.0]);
        let a2 = Hermitian::from_real_rows(&[&[1.0, 2.0, 1.0], &[2.0, 7.0, 1.0], &[1.0, 1.0, 0.5]]).unwrap();
        (a1, a2)
    }

    #[test]
    fn projection_examples() {
        let a = Hermitian::<f64>::diag(&[1.0, 1.0, 3.0]);
        let p = eigenspace_projection(&a, 1.0, None).unwrap().projector;
        assert!((&p - &CMatrix::diag(&[1.0, 1.0, 0.0])).max_abs() < 1e-15);
        assert!(eigenspace_projection(&Hermitian::<f64>::diag(&[1.0, 3.0]), 2.0, None).is_err());
    }

    #[test]
    fn t_operator_examples() {
        let t = t_operator(&Hermitian::<f64>::diag(&[1.0, 3.0]), 1.0).unwrap();
        assert!((&t - &CMatrix::diag(&[0.0, 0.5])).max_abs() < 1e-15);
        let t = t_operator(&Hermitian::<f64>::diag(&[1.0, 2.0, 4.0]), 1.0).unwrap();
        assert!((&t - &CMatrix::diag(&[0.0, 1.0, 1.0 / 3.0])).max_abs() < 1e-15);
        // inverse variant: A^-1 = diag(1, 1/3) at 1 gives (1/3) / (1 - 1/3) = 0.5 up to sign
        let ti = t_operator(&Hermitian::<f64>::diag(&[1.0, 1.0 / 3.0]), 1.0).unwrap();
        assert!((ti[(1, 1)].re + 1.5).abs() < 1e-14);
    }

    #[test]
    fn line_residues_commuting_and_intro() {
        let a1 = Hermitian::<f64>::diag(&[1.0, 3.0]);
        let a2 = Hermitian::<f64>::diag(&[2.0, 7.0]);
        let r = line_residue_check(&a1, &a2, 1.0, 2.0).unwrap();
        assert!(r.r1 < 1e-10 && r.r3 < 1e-10 && r.r3_inv.unwrap() < 1e-10);
        let (b1, b2) = intro();
        let r = line_residue_check(&b1, &b2, 1.0, 1.0).unwrap();
        assert!(r.r1 < 1e-12, "{r:?}");
        // the line lies in sigma(A1, A2): 4 * 1/4 from lambda = 5 cancels 1 * (-1) from lambda = 0
        assert!(r.r3 < 1e-12, "{r:?}");
        assert!(r.r3_inv.is_none());
    }

    #[test]
    fn residues_match_closed_forms_on_generic_pair() {
        let a1 = Hermitian::<f64>::diag(&[1.0, 2.5, -1.5]);
        let a2 = Hermitian::from_real_rows(&[&[0.7, 0.4, -0.2], &[0.4, 1.1, 0.3], &[-0.2, 0.3, -0.6]]).unwrap();
        let line = BiPoly::from_terms(&[(1, 0, 1.0), (0, 1, 0.9), (0, 0, -1.0)]);
        let c = ContourSpec::around(&a1, 1.0, 256).unwrap();
        let (r1, r2) = line_residue_closed_forms(&a1, &a2, 1.0, 0.9).unwrap();
        let q1 = psi_residue_matrix(&a1, &a2, &line, 1, 1.0, &c).unwrap();
        let q2 = psi_residue_matrix(&a1, &a2, &line, 2, 1.0, &c).unwrap();
        assert!((&q1 - &r1).max_abs() < 1e-12);
        assert!((&q2 - &r2).max_abs() < 1e-12);
    }

    #[test]
    fn full_pencil_residues_vanish() {
        let (a1, a2) = intro();
        let p = pencil_polynomial(&a1, &a2).unwrap();
        let c = ContourSpec::around(&a1, 1.0, 256).unwrap();
        for m in 1..=4 {
            let r = psi_residue(&a1, &a2, &p, m, 1.0, &c).unwrap();
            assert!(r < 1e-8, "m = {m}: {r}");
        }
    }

    #[test]
    fn contour_rejects_nearby_eigenvalue() {
        let c = ContourSpec { center: 1.0, radius: 0.5, nodes: 64 };
        assert!(c.validate(&[1.0, 1.45]).is_err());
        assert!(c.validate(&[1.0, 2.0]).is_ok());
    }

    #[test]
    fn invariant_subspace_examples() {
        let b = Hermitian::<f64>::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e1 = CMatrix::from_real_rows(&[&[1.0], &[0.0]]);
        assert!((verify_invariant_subspace(&b, &e1).unwrap() - 1.0).abs() < 1e-15);
        let bad = CMatrix::from_real_rows(&[&[2.0], &[0.0]]);
        assert!(verify_invariant_subspace(&b, &bad).is_err());
    }

    #[test]
    fn implicit_derivative_examples() {
        let line = BiPoly::<f64>::from_terms(&[(1, 0, 1.0), (0, 1, 1.0), (0, 0, -1.0)]);
        assert_eq!(implicit_derivatives(&line, 1.0).unwrap(), (-1.0, 0.0));
        let circle = BiPoly::<f64>::from_terms(&[(2, 0, 1.0), (0, 2, 1.0), (0, 0, -1.0)]);
        assert_eq!(implicit_derivatives(&circle, 1.0).unwrap(), (0.0, -1.0));
        assert!(implicit_derivatives(&circle, 0.5).is_err());
    }

    #[test]
    fn first_moment_examples() {
        let fm = first_moments_check(&Hermitian::<f64>::diag(&[1.0, 3.0]), &Hermitian::diag(&[5.0, 2.0]), 1.0).unwrap();
        assert!((fm.dx + 5.0).abs() < 1e-12 && fm.first < 1e-12 && fm.second < 1e-12, "{fm:?}");
        let a2 = Hermitian::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let fm = first_moments_check(&Hermitian::<f64>::diag(&[1.0, 3.0]), &a2, 1.0).unwrap();
        // det(x A1 + y A2 - I) = (x - 1)(3x - 1) - y^2, so x'' = 1 and P1 A2 T A2 P1 = P1 / 2
        assert!(fm.dx.abs() < 1e-12 && (fm.d2x - 1.0).abs() < 1e-10, "{fm:?}");
        assert!(fm.first < 1e-12 && fm.second < 1e-10, "{fm:?}");
    }

    #[test]
    fn common_eigenspace_examples() {
        let opts = DecomposeOptions::default();
        let r = common_eigenspace_test(&Hermitian::<f64>::diag(&[1.0, 3.0]), &Hermitian::diag(&[2.0, 7.0]), 1.0, 2.0, 0.2, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.basis[(0, 0)].norm() - 1.0).abs() < 1e-14);
        let (a1, a2) = intro();
        let r = common_eigenspace_test(&a1, &a2, 1.0, 1.0, 0.2, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::No, "{r:?}");
        assert!(r.line_checks[0].passed() && !r.line_checks[1].passed(), "{r:?}");
    }

    #[test]
    fn curve_test_small_block_example() {
        let a = Hermitian::<f64>::diag(&[1.0, 2.0, 5.0]);
        let b = Hermitian::from_real_rows(&[&[1.0, 0.3, 0.0], &[0.3, 2.0, 0.0], &[0.0, 0.0, 4.0]]).unwrap();
        let block_a = Hermitian::diag(&[1.0, 2.0]);
        let block_b = Hermitian::from_real_rows(&[&[1.0, 0.3], &[0.3, 2.0]]).unwrap();
        let gamma = pencil_polynomial(&block_a, &block_b).unwrap();
        let r = curve_decomposability_test(&a, &b, 2, &gamma, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes, "{r:?}");
        assert!((r.line_checks[0].line.alpha - 2.0).abs() < 1e-9);
        assert!((r.line_checks[0].line.beta - (2.0 - 0.09)).abs() < 1e-9);
        let truth = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        assert!(principal_angle(&r.basis, &truth).unwrap() < 1e-10);
    }

    #[test]
    fn curve_test_whole_space() {
        let (a1, a2) = intro();
        let a = a1.shift(1.0);
        let p = pencil_polynomial(&a, &a2).unwrap();
        let r = curve_decomposability_test(&a, &a2, 3, &p, &DecomposeOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
    }

    #[test]
    fn curve_test_rejects_non_factor() {
        let (a1, a2) = intro();
        let circle = BiPoly::from_terms(&[(2, 0, 1.0), (0, 2, 1.0), (0, 0, -1.0)]);
        assert!(curve_decomposability_test(&a1, &a2, 2, &circle, &DecomposeOptions::default()).is_err());
    }
}
