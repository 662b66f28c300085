use proptest::prelude::*;

use qil_core::linalg::{
    c, frob, identity, kernel_basis, kronecker, polar_decompose, psd_sqrt, rank_and_bases,
    spectral_norm, svd,
};
use qil_core::random::{complex_gaussian, random_unitary, rng};
use qil_core::{CMatrix, ToleranceConfig};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// A `d×d` matrix of rank `r` built from Gaussian factors.
fn low_rank(seed: u64, d: usize, r: usize) -> CMatrix {
    let mut g = rng(seed);
    complex_gaussian(&mut g, d, r) * complex_gaussian(&mut g, r, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polar_factors_recompose(seed in any::<u64>(), d in 1usize..=6) {
        let m = complex_gaussian(&mut rng(seed), d, d);
        let polar = polar_decompose(&m, &tol()).unwrap();
        let scale = frob(&m);
        prop_assert!(frob(&(&polar.u * &polar.p - &m)) <= 1e-10 * scale);
        prop_assert!(frob(&(polar.u.adjoint() * &polar.u - identity(d))) <= 1e-10 * d as f64);
        prop_assert!(frob(&(polar.p.adjoint() - &polar.p)) <= 1e-12 * scale);
        prop_assert!(polar.invertible);
    }

    #[test]
    fn psd_root_squares_back(seed in any::<u64>(), d in 1usize..=6) {
        let g = complex_gaussian(&mut rng(seed), d, d);
        let q = g.adjoint() * &g;
        let root = psd_sqrt(&q, &tol()).unwrap();
        prop_assert!(frob(&(&root * &root - &q)) <= 1e-10 * frob(&q));
    }

    #[test]
    fn rank_and_complementary_bases(seed in any::<u64>(), d in 2usize..=6, r in 0usize..=6) {
        let r = r.min(d);
        let m = low_rank(seed, d, r);
        let bases = rank_and_bases(&m, &tol()).unwrap();
        prop_assert_eq!(bases.rank, r);
        prop_assert_eq!(bases.range_basis.ncols() + bases.cokernel_basis.ncols(), d);
        let w = qil_core::linalg::hstack(&bases.range_basis, &bases.cokernel_basis);
        prop_assert!(frob(&(w.adjoint() * &w - identity(d))) <= 1e-10);
        prop_assert!(frob(&(m.adjoint() * &bases.cokernel_basis)) <= 1e-10 * frob(&m).max(1.0));
        let k = kernel_basis(&m, &tol()).unwrap();
        prop_assert_eq!(k.ncols(), d - r);
        prop_assert!(frob(&(&m * &k)) <= 1e-10 * frob(&m).max(1.0));
    }

    #[test]
    fn singular_values_are_unitarily_invariant(seed in any::<u64>(), d in 1usize..=6) {
        let mut g = rng(seed);
        let m = complex_gaussian(&mut g, d, d);
        let u = random_unitary(&mut g, d);
        let a = svd(&m).unwrap().singular_values;
        let b = svd(&(&u * &m)).unwrap().singular_values;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * a[0]);
        }
        prop_assert!((spectral_norm(&m).unwrap() - a[0]).abs() <= 1e-12 * a[0]);
    }

    #[test]
    fn kronecker_mixed_product(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3) {
        let mut g = rng(seed);
        let a = complex_gaussian(&mut g, p, p);
        let b = complex_gaussian(&mut g, q, q);
        let cc = complex_gaussian(&mut g, p, p);
        let d = complex_gaussian(&mut g, q, q);
        let lhs = kronecker(&a, &b).unwrap() * kronecker(&cc, &d).unwrap();
        let rhs = kronecker(&(&a * &cc), &(&b * &d)).unwrap();
        prop_assert!(frob(&(&lhs - &rhs)) <= 1e-12 * frob(&lhs).max(1.0));
        let adj = kronecker(&a, &b).unwrap().adjoint();
        prop_assert_eq!(adj, kronecker(&a.adjoint(), &b.adjoint()).unwrap());
    }
}

#[test]
fn identity_tensor_is_block_diagonal() {
    let a = complex_gaussian(&mut rng(1), 2, 2);
    let k = kronecker(&identity(2), &a).unwrap();
    assert_eq!(k, qil_core::linalg::direct_sum(&a, &a));
    let six = kronecker(
        &CMatrix::from_element(1, 1, c(2.0, 0.0)),
        &CMatrix::from_element(1, 1, c(3.0, 0.0)),
    )
    .unwrap();
    assert_eq!(six[(0, 0)], c(6.0, 0.0));
}
