//! Fixed examples and seeded random pairs.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64(seed)`. Complex Gaussian
//! entries are drawn real part first, row-major over the upper triangle
//! (diagonal real), so a seed fixes the output bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exterior::subsets;
use crate::matrix::{orthonormalize, CMatrix, Hermitian};
use crate::pencil::pencil_polynomial;
use crate::poly::BiPoly;
use crate::scalar::{c, Real, C};

/// `A1 = diag(1, 5, 0)`, `A2 = [[1, 2, 1], [2, 7, 1], [1, 1, 1/2]]`.
///
/// The joint spectrum contains the line `{x + y = 1}`, yet the pair has no
/// common eigenvector and no common two-dimensional invariant subspace.
pub fn intro_example<T: Real>() -> (Hermitian<T>, Hermitian<T>) {
    let a1 = Hermitian::diag(&[T::one(), T::lit(5.0), T::zero()]);
    let a2 = Hermitian::<f64>::from_real_rows(&[&[1.0, 2.0, 1.0], &[2.0, 7.0, 1.0], &[1.0, 1.0, 0.5]])
        .expect("symmetric literal")
        .cast();
    (a1, a2)
}

/// The quadratic factor `5xy - 5y^2 - 15y - 10x + 2` of the pencil determinant
/// of [`intro_example`].
pub fn intro_quadratic<T: Real>() -> BiPoly<T> {
    BiPoly::from_terms(&[
        (1, 1, T::lit(5.0)),
        (0, 2, T::lit(-5.0)),
        (0, 1, T::lit(-15.0)),
        (1, 0, T::lit(-10.0)),
        (0, 0, T::lit(2.0)),
    ])
}

/// `C1 = [[I, 0], [0, -I]]`, `C2 = [[0, D], [D*, 0]]` for unitary `D`.
pub fn circle_pair<T: Real>(d: &CMatrix<T>) -> Result<(Hermitian<T>, Hermitian<T>)> {
    if !d.is_square() || d.rows() == 0 {
        return Err(Error::invalid("D must be a nonempty square matrix"));
    }
    let n = d.rows();
    let defect = (&(d * &d.adjoint()) - &CMatrix::identity(n)).max_abs();
    if defect > T::tol(1e-10) {
        return Err(Error::invalid(format!("D is not unitary (||DD* - I||_max = {defect:e})")));
    }
    let one = C::new(T::one(), T::zero());
    let c1 = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            C::new(T::zero(), T::zero())
        } else if i < n {
            one
        } else {
            -one
        }
    });
    let c2 = CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => d[(i, j - n)],
        (false, true) => d[(j, i - n)].conj(),
        _ => C::new(T::zero(), T::zero()),
    });
    Ok((Hermitian::symmetrized(c1), Hermitian::symmetrized(c2)))
}

/// Relation residuals of the dihedral group of order 8.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Bc2Check<T> {
    pub holds: bool,
    /// `||C1^2 - I||`
    pub first: T,
    /// `||C2^2 - I||`
    pub second: T,
    /// `||(C1 C2)^4 - I||`
    pub braid: T,
}

/// Whether `C1^2 = C2^2 = (C1 C2)^4 = I` within `1e-9`.
pub fn bc2_check<T: Real>(c1: &Hermitian<T>, c2: &Hermitian<T>) -> Result<Bc2Check<T>> {
    if c1.n() != c2.n() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let i = CMatrix::identity(c1.n());
    let (m1, m2) = (c1.matrix(), c2.matrix());
    let first = (&(m1 * m1) - &i).spectral_norm()?;
    let second = (&(m2 * m2) - &i).spectral_norm()?;
    let p = m1 * m2;
    let p2 = &p * &p;
    let braid = (&(&p2 * &p2) - &i).spectral_norm()?;
    let tol = T::tol(1e-9);
    Ok(Bc2Check { holds: first <= tol && second <= tol && braid <= tol, first, second, braid })
}

fn gauss<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Complex Gaussian Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Hermitian<T> {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C::new(gauss(rng), T::zero());
        for j in (i + 1)..n {
            let z = c(gauss::<T>(rng), gauss::<T>(rng)) * T::FRAC_1_SQRT_2();
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Hermitian::symmetrized(m)
}

/// Unitary matrix from Gram-Schmidt on complex Gaussian columns.
pub fn random_unitary<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    loop {
        let mut cols: Vec<Vec<C<T>>> = (0..n).map(|_| (0..n).map(|_| c(gauss(rng), gauss(rng))).collect()).collect();
        if orthonormalize(&mut cols, T::tol(1e-8)) == n {
            return CMatrix::from_columns(&cols);
        }
    }
}

/// Output of the random generators.
#[derive(Clone, Debug)]
pub struct RandomPair<T: Real> {
    pub a: Hermitian<T>,
    pub b: Hermitian<T>,
    /// `e_1, ..., e_k`, invariant for the unperturbed pair.
    pub basis: CMatrix<T>,
    /// Pencil determinant of the `k x k` blocks.
    pub gamma: BiPoly<T>,
}

fn generic_diagonal<T: Real>(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<T>> {
    for _ in 0..1000 {
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let m = rng.gen_range(0.5..2.5);
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let mut prods: Vec<f64> = subsets(n, k).iter().map(|s| s.iter().map(|&i| d[i]).product()).collect();
        prods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let separated = prods.windows(2).all(|w| w[1] - w[0] > 1e-5 * (1.0 + w[0].abs().max(w[1].abs())));
        if separated {
            return Ok(d.into_iter().map(T::lit).collect());
        }
    }
    Err(Error::numerical("no diagonal with separated subset products after 1000 draws"))
}

fn check_dims(n: usize, k: usize) -> Result<()> {
    if !(1 <= k && k < n && n <= 12) {
        return Err(Error::invalid(format!("need 1 <= k < N <= 12, got N = {n}, k = {k}")));
    }
    Ok(())
}

/// Diagonal `A` with separated `k`-subset products and `B` block diagonal for
/// `span{e_1..e_k} + rest`.
pub fn random_decomposable_pair<T: Real>(n: usize, k: usize, seed: u64) -> Result<RandomPair<T>> {
    check_dims(n, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = generic_diagonal::<T>(n, k, &mut rng)?;
    let top = random_hermitian::<T>(k, &mut rng);
    let bottom = random_hermitian::<T>(n - k, &mut rng);
    let mut m = CMatrix::zeros(n, n);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] = top.matrix()[(i, j)];
        }
    }
    for i in 0..(n - k) {
        for j in 0..(n - k) {
            m[(k + i, k + j)] = bottom.matrix()[(i, j)];
        }
    }
    let a = Hermitian::diag(&d);
    let b = Hermitian::symmetrized(m);
    let basis = CMatrix::identity(n).column_block(0, k);
    let gamma = pencil_polynomial(&Hermitian::diag(&d[..k]), &top)?;
    Ok(RandomPair { a, b, basis, gamma })
}

/// [`random_decomposable_pair`] with `B + eps E`, `E` Hermitian, supported on
/// the off-diagonal blocks, `||E|| = 1`.
pub fn random_perturbed_pair<T: Real>(n: usize, k: usize, seed: u64, eps: T) -> Result<RandomPair<T>> {
    let mut pair = random_decomposable_pair::<T>(n, k, seed)?;
    // E comes from a far segment of the same stream, so eps = 0 reproduces B
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(1 << 40);
    let mut e = CMatrix::zeros(n, n);
    for i in 0..k {
        for j in k..n {
            let z = c(gauss::<T>(&mut rng), gauss::<T>(&mut rng));
            e[(i, j)] = z;
            e[(j, i)] = z.conj();
        }
    }
    let s = e.spectral_norm()?;
    let e = e.scale_re(eps / s);
    pair.b = Hermitian::symmetrized(pair.b.matrix() + &e);
    Ok(pair)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    IntroExample,
    CirclePair,
    Decomposable,
    Perturbed,
}

/// Parameters of a gallery entry; the output depends only on these.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Matrix dimension `N`, or the block size `n` of a circle pair.
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub eps: f64,
}

/// A generated pair with whatever ground truth the generator knows.
#[derive(Clone, Debug)]
pub struct GalleryEntry<T: Real> {
    pub a: Hermitian<T>,
    pub b: Hermitian<T>,
    pub basis: Option<CMatrix<T>>,
    pub gamma: Option<BiPoly<T>>,
}

impl GeneratorSpec {
    pub fn generate<T: Real>(&self) -> Result<GalleryEntry<T>> {
        match self.kind {
            GeneratorKind::IntroExample => {
                let (a, b) = intro_example();
                Ok(GalleryEntry { a, b, basis: None, gamma: Some(intro_quadratic()) })
            }
            GeneratorKind::CirclePair => {
                if self.n == 0 {
                    return Err(Error::invalid("circle pair needs n >= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let d = random_unitary(self.n, &mut rng);
                let (a, b) = circle_pair(&d)?;
                Ok(GalleryEntry { a, b, basis: None, gamma: None })
            }
            GeneratorKind::Decomposable | GeneratorKind::Perturbed => {
                let p = if self.kind == GeneratorKind::Decomposable {
                    random_decomposable_pair(self.n, self.k, self.seed)?
                } else {
                    random_perturbed_pair(self.n, self.k, self.seed, T::lit(self.eps))?
                };
                Ok(GalleryEntry { a: p.a, b: p.b, basis: Some(p.basis), gamma: Some(p.gamma) })
            }
        }
    }
}
