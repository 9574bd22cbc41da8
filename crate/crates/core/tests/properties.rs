use jointspec::almost::{almost_common_eigenvector, epsilon_of_vector, pinch};
use jointspec::decompose::{
    common_eigenspace_test, curve_decomposability_test, divisibility_residual, psi_residue, ContourSpec,
    DecomposeOptions, Verdict,
};
use jointspec::exterior::{complementary_power, exterior_power, subsets};
use jointspec::gallery::{circle_pair, random_decomposable_pair, random_hermitian, random_unitary};
use jointspec::matrix::{commutator_norm, CMatrix, Hermitian};
use jointspec::pencil::{
    eval_pencil, hausdorff_to_line, line_multiplicity, pencil_polynomial, transform_pencil, ContainmentRoute,
};
use jointspec::poly::{line_containment, Line, PolyDisk};
use jointspec::scalar::{c, cr};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn herm(n: usize, seed: u64) -> Hermitian<f64> {
    random_hermitian(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Commuting pair `U diag(l) U*`, `U diag(b) U*` with well separated lines.
fn commuting_pair(n: usize, seed: u64) -> (Hermitian<f64>, Hermitian<f64>, Vec<(f64, f64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary::<f64>(n, &mut rng);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let l = (1.0 + j as f64) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (l, rng.gen_range(-2.0..2.0))
        })
        .collect();
    let conj = |d: Vec<f64>| Hermitian::symmetrized(&(&u * &CMatrix::diag(&d)) * &u.adjoint());
    let a1 = conj(pairs.iter().map(|p| p.0).collect());
    let a2 = conj(pairs.iter().map(|p| p.1).collect());
    (a1, a2, pairs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigen_reconstructs(n in 1usize..9, seed in any::<u64>()) {
        let a = herm(n, seed);
        let e = a.eigen().unwrap();
        let v = &e.vectors;
        let rebuilt = &(v * &CMatrix::diag(&e.values)) * &v.adjoint();
        let scale = a.norm().unwrap().max(1e-300);
        prop_assert!((&rebuilt - a.matrix()).spectral_norm().unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn perturb_maps_spectrum(n in 1usize..7, seed in any::<u64>(), eps in 0.1f64..3.0, lam in -2.0f64..2.0) {
        let a = herm(n, seed);
        let got = sorted(a.perturb(eps, lam).eigenvalues().unwrap());
        let want = sorted(a.eigenvalues().unwrap().iter().map(|v| (1.0 + eps) * v - lam * eps).collect());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-10 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn commutator_vanishes_exactly_for_commuting(n in 1usize..6, seed in any::<u64>()) {
        let (a1, a2, _) = commuting_pair(n, seed);
        prop_assert!(commutator_norm(&a1, &a2).unwrap() <= 1e-10);
        let b = herm(n, seed ^ 1);
        let ab = a1.matrix() * b.matrix();
        let ba = b.matrix() * a1.matrix();
        let frob = (&ab - &ba).frobenius_norm();
        let cn = commutator_norm(&a1, &b).unwrap();
        prop_assert_eq!(cn <= 1e-10, frob <= 1e-10);
    }

    #[test]
    fn det_of_inverse(n in 1usize..7, seed in any::<u64>()) {
        let m = herm(n, seed).shift(10.0).into_matrix();
        let d = m.det().unwrap() * m.inverse().unwrap().det().unwrap();
        prop_assert!((d - cr(1.0)).norm() <= 1e-8);
    }

    #[test]
    fn axis_points_lie_on_the_curve(n in 1usize..7, seed in any::<u64>()) {
        let (a1, a2) = (herm(n, seed), herm(n, seed.wrapping_add(7)));
        let p = pencil_polynomial(&a1, &a2).unwrap();
        for l in a1.eigenvalues().unwrap() {
            if l.abs() > 1e-3 {
                let v = p.eval(cr(1.0 / l), cr(0.0)).norm();
                prop_assert!(v <= 1e-8 * p.coef_norm() * (1.0 + 1.0 / l.abs()).powi(n as i32));
            }
        }
    }

    #[test]
    fn generic_degree_is_dimension(n in 1usize..8, seed in any::<u64>()) {
        let p = pencil_polynomial(&herm(n, seed), &herm(n, seed ^ 0xabc)).unwrap();
        prop_assert_eq!(p.effective_degree(1e-9), n);
    }

    #[test]
    fn commuting_lines_are_contained(n in 1usize..6, seed in any::<u64>()) {
        let (a1, a2, pairs) = commuting_pair(n, seed);
        let p = pencil_polynomial(&a1, &a2).unwrap();
        for &(l, b) in &pairs {
            let line = Line::new(l, b).unwrap();
            prop_assert!(line_containment(&p, &line, 1e-7).unwrap() >= 1);
            // keep the other lines out of the disk
            let gap = pairs
                .iter()
                .filter(|q| **q != (l, b))
                .map(|&(l2, b2)| (l2 / l - 1.0).abs() / l2.hypot(b2))
                .fold(f64::INFINITY, f64::min);
            let disk = PolyDisk::new(1.0 / l, 0.0, (0.4 * gap).min(0.3)).unwrap();
            prop_assert!(hausdorff_to_line(&p, &line, &disk, 32).unwrap().distance <= 1e-6);
        }
    }

    #[test]
    fn containment_routes_agree(n in 1usize..6, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (a1, a2, pairs) = commuting_pair(n, seed);
        let (l, b) = pairs[pick.index(n)];
        let on = Line::new(l, b).unwrap();
        let off = Line::new(l + 0.37, b - 0.21).unwrap();
        for line in [on, off] {
            let p = line_multiplicity(&a1, &a2, &line, ContainmentRoute::Polynomial, 1e-7, 1e-9).unwrap();
            let s = line_multiplicity(&a1, &a2, &line, ContainmentRoute::Spectral, 1e-7, 1e-9).unwrap();
            prop_assert_eq!(p, s);
        }
    }

    #[test]
    fn exterior_power_laws(n in 2usize..6, k in 1usize..5, seed in any::<u64>()) {
        let k = 1 + (k - 1) % n;
        let a = herm(n, seed);
        let b = herm(n, seed ^ 0x55);
        let ev = a.eigenvalues().unwrap();
        let want = sorted(subsets(n, k).iter().map(|s| s.iter().map(|&i| ev[i]).product()).collect());
        let ext = exterior_power(a.matrix(), k).unwrap();
        let got = sorted(Hermitian::symmetrized(ext.clone()).eigenvalues().unwrap());
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-8 * scale);
        }
        let lhs = exterior_power(&(a.matrix() * b.matrix()), k).unwrap();
        let rhs = &ext * &exterior_power(b.matrix(), k).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-8 * rhs.max_abs().max(1.0));
        let na = a.norm().unwrap();
        prop_assert!(ext.spectral_norm().unwrap() <= na.powi(k as i32) * (1.0 + 1e-10));
    }

    #[test]
    fn sylvester_identity(n in 2usize..7, k in 1usize..6, seed in any::<u64>()) {
        let k = 1 + (k - 1) % (n - 1);
        let a = herm(n, seed).shift(0.5);
        let det: f64 = a.eigenvalues().unwrap().iter().product();
        prop_assume!(det.abs() > 1e-3);
        let comp = complementary_power(&a, k).unwrap();
        let ext = exterior_power(a.matrix(), k).unwrap();
        let prod = comp.matrix() * &ext;
        let resid = (&prod - &CMatrix::identity(prod.rows()).scale_re(det)).max_abs();
        prop_assert!(resid <= 1e-8 * det.abs().max(1.0));
    }

    #[test]
    fn transform_covariance(n in 1usize..6, seed in any::<u64>(), m in prop::array::uniform4(-2.0f64..2.0)) {
        let cm = [[m[0], m[1]], [m[2], m[3]]];
        prop_assume!((m[0] * m[3] - m[1] * m[2]).abs() > 0.1);
        let (a1, a2) = (herm(n, seed), herm(n, seed ^ 9));
        let (b1, b2) = transform_pencil(&a1, &a2, cm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            let (x, y) = (c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-1.0..1.0), 0.3));
            let lhs = eval_pencil(&b1, &b2, x, y).unwrap();
            let rhs = eval_pencil(&a1, &a2, x * m[0] + y * m[2], x * m[1] + y * m[3]).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn epsilon_of_vector_bounds(n in 1usize..7, seed in any::<u64>()) {
        let a = herm(n, seed);
        let e = a.eigen().unwrap();
        let na = a.norm().unwrap();
        for j in 0..n {
            prop_assert!(epsilon_of_vector(&a, &e.vectors.column(j)).unwrap() <= 1e-10 * na.max(1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi: Vec<_> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        prop_assert!(epsilon_of_vector(&a, &xi).unwrap() <= 2.0 * na + 1e-12);
    }

    #[test]
    fn circle_pair_relations(n in 1usize..5, seed in any::<u64>(), theta in -0.3f64..0.3) {
        let d = random_unitary::<f64>(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let (c1, c2) = circle_pair(&d).unwrap();
        let anti = &(c1.matrix() * c2.matrix()) + &(c2.matrix() * c1.matrix());
        prop_assert!(anti.max_abs() <= 1e-10);
        for s in [&c1, &c2] {
            let ev = s.eigenvalues().unwrap();
            prop_assert_eq!(ev.iter().filter(|v| (*v - 1.0).abs() < 1e-9).count(), n);
            prop_assert_eq!(ev.iter().filter(|v| (*v + 1.0).abs() < 1e-9).count(), n);
        }
        let rot = c1.scale(theta.cos()).add(&c2.scale(theta.sin()));
        let sq = rot.matrix() * rot.matrix();
        prop_assert!((&sq - &CMatrix::identity(2 * n)).max_abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn line_verdict_survives_perturb_and_rescale(n in 2usize..6, seed in any::<u64>(), which in 0usize..2) {
        let opts = DecomposeOptions::default();
        let (a1, a2, lam, a) = if which == 0 {
            let pair = random_decomposable_pair::<f64>(n, 1, seed).unwrap();
            let (lam, a) = (pair.a.matrix()[(0, 0)].re, pair.b.matrix()[(0, 0)].re);
            (pair.a, pair.b, lam, a)
        } else {
            let a1 = Hermitian::diag(&(0..n).map(|j| 1.0 + j as f64).collect::<Vec<_>>());
            (a1, herm(n, seed), 1.0, 0.4)
        };
        let base = common_eigenspace_test(&a1, &a2, lam, a, 0.2, &opts).unwrap().verdict;
        prop_assert_eq!(base, if which == 0 { Verdict::Yes } else { Verdict::No });
        for eps in [0.5, 2.0] {
            // the line {lam x + a y = 1} maps to {lam' x + a' y = 1}
            let v = common_eigenspace_test(&a1.perturb(eps, lam), &a2.perturb(eps, a), lam, a, 0.2, &opts).unwrap();
            prop_assert_eq!(v.verdict, base);
        }
        for s in [0.3, 4.0] {
            let v = common_eigenspace_test(&a1.scale(s), &a2.scale(s), lam * s, a * s, 0.2, &opts).unwrap();
            prop_assert_eq!(v.verdict, base);
        }
    }

    #[test]
    fn yes_verdicts_divide_and_have_vanishing_residues(n in 2usize..7, k in 1usize..6, seed in any::<u64>()) {
        let k = 1 + (k - 1) % (n - 1);
        let pair = random_decomposable_pair::<f64>(n, k, seed).unwrap();
        let opts = DecomposeOptions::default();
        let r = curve_decomposability_test(&pair.a, &pair.b, k, &pair.gamma, &opts).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Yes);
        prop_assert!(r.genericity && r.invariance_residual <= opts.tol_resid);
        let (ra, rb) = (pair.a.compress(&r.basis), pair.b.compress(&r.basis));
        let gamma = pencil_polynomial(&ra, &rb).unwrap();
        prop_assert!(divisibility_residual(&pair.a, &pair.b, &gamma).unwrap() <= opts.tol_divide);
        if k == 1 {
            let lam = pair.a.matrix()[(0, 0)].re;
            let contour = ContourSpec::around(&pair.a, lam, 256).unwrap();
            for m in 1..=2 * k {
                prop_assert!(psi_residue(&pair.a, &pair.b, &pair.gamma, m, lam, &contour).unwrap() <= 1e-7);
            }
        }
    }

    #[test]
    fn almost_eigenvector_containment(seed in any::<u64>(), log_eps in -5.0f64..-3.0) {
        let (alpha, beta, rho) = (2.0, 0.5, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = Hermitian::diag(&[alpha, 3.0 * alpha, -2.0 * alpha, 4.0 * alpha]);
        let e = random_hermitian::<f64>(4, &mut rng);
        let e = e.scale(10f64.powf(log_eps) / e.norm().unwrap());
        let m = Hermitian::diag(&[1.0, 0.4, -0.3, 0.2]).add(&e);
        let a2 = m.scale(beta / m.norm().unwrap());
        let r = almost_common_eigenvector(&a1, &a2, alpha, beta, rho, 32, None).unwrap();
        prop_assume!(r.preconditions_ok);
        let bound = r.delta_bound.unwrap();
        prop_assert!(r.delta_actual <= bound + 1e-9);
        // the pinched matrix is within sqrt2 C sqrt(eps) of A2
        let basis = CMatrix::from_columns(std::slice::from_ref(&r.vector));
        let gap = (a2.matrix() - pinch(&a2, &basis).matrix()).spectral_norm().unwrap();
        let eps = r.epsilon_measured;
        let cc = (8.0 * beta * (1.0 + beta * beta) / (rho - 4.0 * beta * eps)).sqrt();
        prop_assert!(gap <= std::f64::consts::SQRT_2 * cc * eps.sqrt() + 1e-12);
    }
}
