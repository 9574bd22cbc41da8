//! Quantitative spectral continuity: almost eigenvectors, common almost
//! eigenvectors from a nearby line, and a commutator bound from line fits.

use crate::error::{Error, Result};
use crate::matrix::{commutator_norm, dot, norm, CMatrix, Hermitian};
use crate::pencil::{curve_samples, hausdorff_to_line, pencil_polynomial};
use crate::poly::{BiPoly, Line, PolyDisk};
use crate::scalar::{Real, C};

/// Smallest `eps` with `||A xi - (<A xi, xi> / ||xi||^2) xi|| <= eps ||xi||`.
pub fn epsilon_of_vector<T: Real>(a: &Hermitian<T>, xi: &[C<T>]) -> Result<T> {
    if xi.len() != a.n() {
        return Err(Error::invalid(format!("vector has length {}, matrix is {}x{}", xi.len(), a.n(), a.n())));
    }
    let nx = norm(xi);
    if !(nx > T::zero()) {
        return Err(Error::invalid("vector must be nonzero"));
    }
    let ax = a.matrix().mul_vec(xi);
    let q = dot(xi, &ax) / (nx * nx);
    let r: Vec<C<T>> = ax.iter().zip(xi).map(|(&u, &v)| u - q * v).collect();
    Ok(norm(&r) / nx)
}

/// `P A2 P + (I - P) A2 (I - P)` for `P` the projection onto the span of
/// orthonormal `basis`.
pub fn pinch<T: Real>(a2: &Hermitian<T>, basis: &CMatrix<T>) -> Hermitian<T> {
    let p = basis * &basis.adjoint();
    let q = &CMatrix::identity(a2.n()) - &p;
    let m = a2.matrix();
    Hermitian::symmetrized(&(&(&p * m) * &p) + &(&(&q * m) * &q))
}

/// Flags of the hypotheses of [`almost_common_eigenvector`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct AlmostPreconditions {
    /// `alpha` is an eigenvalue of `A1`.
    pub on_curve: bool,
    /// `||A2|| = |beta|` (within `1e-8`, or within the slack when given).
    pub norm_ok: bool,
    /// `d/dx + beta d/dy` of the determinant does not vanish on the sampled curve.
    pub derivative_ok: bool,
}

impl AlmostPreconditions {
    pub fn all(&self) -> bool {
        self.on_curve && self.norm_ok && self.derivative_ok
    }
}

/// Report of [`almost_common_eigenvector`]. Distances are measured for the
/// rescaled pair `(A1 / alpha, A2)` near `(1, 0)` against `{x + beta y = 1}`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AlmostReport<T: Real> {
    /// Unit eigenvector of `A1` for the eigenvalue nearest `alpha`.
    pub vector: Vec<C<T>>,
    pub eigenvalue: T,
    /// Sampled Hausdorff distance of the spectrum to the line.
    pub epsilon_measured: T,
    pub hausdorff_converged: bool,
    /// `sqrt(8|beta|(1 + beta^2) eps / (rho - 4|beta| eps))`, plus the slack
    /// terms `2|beta| delta + delta^2` under the root when a slack is given.
    /// Omitted when a precondition fails.
    pub delta_bound: Option<T>,
    /// `||A2 e - <A2 e, e> e||`.
    pub delta_actual: T,
    pub preconditions: AlmostPreconditions,
    pub preconditions_ok: bool,
    /// Curvature constant of the close-to-line argument, when its
    /// denominators are positive.
    pub curvature_constant: Option<T>,
    /// Smallest relative `|d/dx + beta d/dy|` over the sampled curve.
    pub min_directional_derivative: T,
}

/// Certificate that an eigenvector of `A1` is an almost eigenvector of `A2`
/// when the spectrum near `(1/alpha, 0)` is within `eps` of `{alpha x + beta y = 1}`
/// and `||A2|| = |beta|`.
pub fn almost_common_eigenvector<T: Real>(
    a1: &Hermitian<T>,
    a2: &Hermitian<T>,
    alpha: T,
    beta: T,
    rho: T,
    resolution: usize,
    slack: Option<T>,
) -> Result<AlmostReport<T>> {
    if a1.n() != a2.n() {
        return Err(Error::invalid("dimension mismatch"));
    }
    if alpha == T::zero() {
        return Err(Error::invalid("alpha must be nonzero"));
    }
    if !(rho > T::zero()) {
        return Err(Error::invalid("rho must be positive"));
    }
    let e = a1.eigen()?;
    let scale = e.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let i = e.nearest(alpha);
    let eigenvalue = e.values[i];
    let on_curve = (eigenvalue - alpha).abs() <= T::tol(1e-8) * scale.max(T::one());
    let vector = e.vectors.column(i);

    let n2 = a2.norm()?;
    let bb = beta.abs();
    let norm_gap = (n2 - bb).abs();
    let norm_ok = match slack {
        Some(s) => norm_gap <= s,
        None => norm_gap <= T::tol(1e-8),
    };

    let h1 = a1.scale(T::one() / alpha);
    let p = pencil_polynomial(&h1, a2)?;
    let line = Line::new(T::one(), beta)?;
    let disk = PolyDisk::new(T::one(), T::zero(), rho)?;
    let haus = hausdorff_to_line(&p, &line, &disk, resolution)?;
    let eps = haus.distance;

    let dir = p.dx().add(&p.dy().scale(beta));
    let deg = p.degree() as i32;
    let cn = p.coef_norm();
    let mut min_dir = T::infinity();
    for cp in curve_samples(&p, &disk, resolution)? {
        let size = T::one().max(cp.x.norm()).max(cp.y.norm()).powi((deg - 1).max(0));
        let v = dir.eval(cp.x, cp.y).norm() / (cn * size * (T::one() + bb));
        min_dir = min_dir.min(v);
    }
    let derivative_ok = min_dir > T::tol(1e-8);

    let denom = rho - T::lit(4.0) * bb * eps;
    if !(denom > T::zero()) {
        return Err(Error::pre(format!(
            "rho - 4|beta| eps = {denom:e} is not positive (eps = {eps:e}); the bound does not apply"
        )));
    }
    let preconditions = AlmostPreconditions { on_curve, norm_ok, derivative_ok };
    let preconditions_ok = preconditions.all();
    let mut radicand = T::lit(8.0) * bb * (T::one() + bb * bb) * eps / denom;
    if let Some(s) = slack {
        radicand += T::lit(2.0) * bb * s + s * s;
    }
    let delta_bound = preconditions_ok.then(|| radicand.sqrt());

    let av = a2.matrix().mul_vec(&vector);
    let q = dot(&vector, &av);
    let r: Vec<C<T>> = av.iter().zip(&vector).map(|(&u, &v)| u - q * v).collect();
    let delta_actual = norm(&r);

    let curvature_constant = curvature_constant(h1.norm()?, n2, rho, eps);
    Ok(AlmostReport {
        vector,
        eigenvalue,
        epsilon_measured: eps,
        hausdorff_converged: haus.converged,
        delta_bound,
        delta_actual,
        preconditions,
        preconditions_ok,
        curvature_constant,
        min_directional_derivative: min_dir,
    })
}

/// `4 sqrt2 (1 + (rho ||A2|| / d)^2)^(3/2) rho / (rho - 4 rho ||A2|| eps / d)^3`
/// with `d = 1 - (1 - rho) ||A1|| - sqrt2 eps ||A2||`.
pub fn curvature_constant<T: Real>(n1: T, n2: T, rho: T, eps: T) -> Option<T> {
    let d = T::one() - (T::one() - rho) * n1 - T::SQRT_2() * eps * n2;
    if !(d > T::zero()) {
        return None;
    }
    let r = rho * n2 / d;
    let den = rho - T::lit(4.0) * r * eps;
    if !(den > T::zero()) {
        return None;
    }
    Some(T::lit(4.0) * T::SQRT_2() * (T::one() + r * r).powf(T::lit(1.5)) * rho / (den * den * den))
}

/// One deflation level of [`commutant_bound`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct CommutantLevel<T> {
    pub dimension: usize,
    pub rho: T,
    /// Distance used in the bound: the larger of the recursion value and the
    /// measured distance at this level.
    pub epsilon: T,
    pub epsilon_measured: T,
    /// `sqrt(8|b|(1 + b^2) / (rho - 4|b| eps))` for the top `|b|`.
    pub c: T,
    /// `sqrt2 C sqrt(eps) ||A1||` added to the bound.
    pub term: T,
    /// `||[A1, A2]||` of this level's compressed pair.
    pub commutator: T,
    /// Whether `||[A1, A2]|| <= sqrt2 C sqrt(eps_measured) ||A1|| + ||[A1', A2']||`
    /// holds with the next level's compression.
    pub inequality_ok: bool,
    /// Distinct nonzero `|eigenvalues|` of both compressions.
    pub hypotheses_ok: bool,
}

/// Line `{alpha_n x + beta_j y = 1}` paired with eigenvalue index `n`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct PairedLine<T> {
    pub line: Line<T>,
    pub alpha_index: usize,
    pub distance: T,
}

/// Report of [`commutant_bound`]. All distances are sampled.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CommutantBoundReport<T> {
    /// `None` once `rho - 4|b| eps <= 0` at some level.
    pub bound: Option<T>,
    pub actual: T,
    pub diverged: bool,
    pub per_level: Vec<CommutantLevel<T>>,
    pub line_family: Vec<PairedLine<T>>,
}

fn by_abs_desc<T: Real>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap());
    idx
}

fn distinct_nonzero_abs<T: Real>(v: &[T]) -> bool {
    let scale = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let idx = by_abs_desc(v);
    let tol = T::tol(1e-8) * scale;
    v.iter().all(|x| x.abs() > tol) && idx.windows(2).all(|w| v[w[0]].abs() - v[w[1]].abs() > tol)
}

/// Greedy pairing: for each eigenvalue of `A2` in descending `|beta|`, the
/// unused eigenvalue `alpha` of `A1` whose line is nearest the spectrum.
fn pair_lines<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, rho: T, resolution: usize) -> Result<Vec<PairedLine<T>>> {
    let alphas = a1.eigenvalues()?;
    let betas = a2.eigenvalues()?;
    let p = pencil_polynomial(a1, a2)?;
    let disk = PolyDisk::new(T::one(), T::zero(), rho)?;
    let floor = T::tol(1e-13) * T::one().max(rho);
    let mut used = vec![false; alphas.len()];
    let mut out = Vec::new();
    for j in by_abs_desc(&betas) {
        let mut best: Option<(usize, T)> = None;
        for (n, &al) in alphas.iter().enumerate() {
            if used[n] {
                continue;
            }
            // rescaled pencil of (A1 / alpha, A2): P(x / alpha, y)
            let q: BiPoly<T> = p.scale_vars(T::one() / al, T::one());
            let d = hausdorff_to_line(&q, &Line::new(T::one(), betas[j])?, &disk, resolution)?.distance;
            // distances below the sampling floor are unresolved, not zero
            let d = d.max(floor);
            if best.map_or(true, |(_, b)| d < b) {
                best = Some((n, d));
            }
        }
        let (n, d) = best.ok_or_else(|| Error::numerical("no line could be paired"))?;
        used[n] = true;
        out.push(PairedLine { line: Line::new(alphas[n], betas[j])?, alpha_index: n, distance: d });
    }
    Ok(out)
}

/// Bound on `||[A1, A2]||` from the distance of the joint spectrum to a family
/// of lines `{alpha_n(j) x + beta_j y = 1}`, by repeated deflation of an
/// almost common eigenvector.
///
/// Each level compresses both matrices to the orthocomplement of the `A1`
/// eigenvector paired with the largest `|beta|`, halves `rho`, and propagates
/// `eps' = 5 N C |beta|^(N-1) M^N sqrt(eps)` with `N` the current dimension and
/// `M = max(|1/alpha_j| + rho + 1)`.
pub fn commutant_bound<T: Real>(a1: &Hermitian<T>, a2: &Hermitian<T>, rho: T, resolution: usize) -> Result<CommutantBoundReport<T>> {
    let n = a1.n();
    if a2.n() != n {
        return Err(Error::invalid("dimension mismatch"));
    }
    if n > 8 {
        return Err(Error::invalid(format!("dimension {n} exceeds 8")));
    }
    if !(rho > T::zero()) {
        return Err(Error::invalid("rho must be positive"));
    }
    for (name, m) in [("A1", a1), ("A2", a2)] {
        if !distinct_nonzero_abs(&m.eigenvalues()?) {
            return Err(Error::pre(format!("{name} needs nonzero eigenvalues with distinct absolute values")));
        }
    }
    let actual = commutator_norm(a1, a2)?;
    let line_family = pair_lines(a1, a2, rho, resolution)?;
    let mut eps = line_family.iter().fold(T::zero(), |m, l| m.max(l.distance));

    let mut q = CMatrix::identity(n);
    let mut rho_l = rho;
    let mut bound = T::zero();
    let mut per_level: Vec<CommutantLevel<T>> = Vec::new();
    let mut diverged = false;
    let mut pairing = line_family.clone();
    for level in 0..n.saturating_sub(1) {
        let b1 = a1.compress(&q);
        let b2 = a2.compress(&q);
        let dim = b1.n();
        let e1 = b1.eigen()?;
        let ev2 = b2.eigenvalues()?;
        let hypotheses_ok = distinct_nonzero_abs(&e1.values) && distinct_nonzero_abs(&ev2);
        if level > 0 {
            pairing = pair_lines(&b1, &b2, rho_l, resolution)?;
        }
        let measured = pairing.iter().fold(T::zero(), |m, l| m.max(l.distance));
        eps = eps.max(measured);
        let top = pairing[0].line.beta.abs();
        let den = rho_l - T::lit(4.0) * top * eps;
        if !(den > T::zero()) {
            diverged = true;
            break;
        }
        let cl = (T::lit(8.0) * top * (T::one() + top * top) / den).sqrt();
        let n1 = b1.norm()?;
        let term = T::SQRT_2() * cl * eps.sqrt() * n1;
        bound += term;
        let commutator = commutator_norm(&b1, &b2)?;

        // deflate the eigenvector paired with the top |beta|
        let drop = pairing[0].alpha_index;
        let keep: Vec<Vec<C<T>>> = (0..dim).filter(|&j| j != drop).map(|j| e1.vectors.column(j)).collect();
        q = &q * &CMatrix::from_columns(&keep);
        let next = commutator_norm(&a1.compress(&q), &a2.compress(&q))?;
        let c_meas = (T::lit(8.0) * top * (T::one() + top * top) / (rho_l - T::lit(4.0) * top * measured)).sqrt();
        let inequality_ok = commutator <= T::SQRT_2() * c_meas * measured.sqrt() * n1 + next + T::tol(1e-12) * n1 * top;

        let m = e1.values.iter().fold(T::zero(), |acc, &al| acc.max((T::one() / al).abs() + rho_l + T::one()));
        let nf = T::from_usize(dim).unwrap();
        per_level.push(CommutantLevel {
            dimension: dim,
            rho: rho_l,
            epsilon: eps,
            epsilon_measured: measured,
            c: cl,
            term,
            commutator,
            inequality_ok,
            hypotheses_ok,
        });
        eps = T::lit(5.0) * nf * cl * top.powi(dim as i32 - 1) * m.powi(dim as i32) * eps.sqrt();
        rho_l *= T::lit(0.5);
    }
    Ok(CommutantBoundReport { bound: (!diverged).then_some(bound), actual, diverged, per_level, line_family })
}
