use proptest::prelude::*;

use qil_core::calculus::{
    adjoint_via_dual, d_apply, d_identity, d_power, d_power_closed, quasi_residual,
};
use qil_core::generate::random_conjugation;
use qil_core::linalg::{c, frob, from_real_rows, identity, inverse, mat_pow};
use qil_core::random::{complex_gaussian, random_unitary, rng};
use qil_core::{CMatrix, DKind, OperatorPair};

fn kind(delta: bool) -> DKind {
    if delta {
        DKind::Delta
    } else {
        DKind::SmallDelta
    }
}

fn triple(seed: u64, d: usize) -> (CMatrix, CMatrix, CMatrix) {
    let mut g = rng(seed);
    (
        complex_gaussian(&mut g, d, d),
        complex_gaussian(&mut g, d, d),
        complex_gaussian(&mut g, d, d),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_recursion(
        seed in any::<u64>(), d in 1usize..=6, m in 0u32..=6, delta in any::<bool>()
    ) {
        let (t, s, x) = triple(seed, d);
        let pair = OperatorPair::new(t, s, kind(delta)).unwrap();
        let rec = d_power(&pair, &x, m).unwrap();
        let closed = d_power_closed(&pair, &x, m).unwrap();
        prop_assert!(frob(&(rec - &closed.value)) <= 1e-10 * closed.scale);
    }

    #[test]
    fn one_more_order_is_one_more_application(
        seed in any::<u64>(), d in 1usize..=5, m in 0u32..=5, delta in any::<bool>()
    ) {
        let (t, s, x) = triple(seed, d);
        let pair = OperatorPair::new(t, s, kind(delta)).unwrap();
        let next = d_power_closed(&pair, &x, m + 1).unwrap();
        let stepped = d_apply(&pair, &d_power_closed(&pair, &x, m).unwrap().value).unwrap();
        prop_assert!(frob(&(stepped - &next.value)) <= 1e-10 * next.scale);
    }

    #[test]
    fn linear_in_the_argument(seed in any::<u64>(), d in 1usize..=5, m in 1u32..=4) {
        let mut g = rng(seed);
        let t = complex_gaussian(&mut g, d, d);
        let s = complex_gaussian(&mut g, d, d);
        let x = complex_gaussian(&mut g, d, d);
        let y = complex_gaussian(&mut g, d, d);
        let a = c(0.3, -1.2);
        for k in [DKind::Delta, DKind::SmallDelta] {
            let pair = OperatorPair::new(t.clone(), s.clone(), k).unwrap();
            let lhs = d_power(&pair, &(&x * a + &y), m).unwrap();
            let rhs = d_power(&pair, &x, m).unwrap() * a + d_power(&pair, &y, m).unwrap();
            prop_assert!(frob(&(&lhs - &rhs)) <= 1e-10 * (frob(&lhs) + frob(&rhs)).max(1.0));
        }
    }

    #[test]
    fn adjoint_through_the_dual_pair(
        seed in any::<u64>(), d in 1usize..=6, m in 0u32..=6, delta in any::<bool>()
    ) {
        let (t, s, _) = triple(seed, d);
        let pair = OperatorPair::new(t, s, kind(delta)).unwrap();
        let direct = d_identity(&pair, m).unwrap();
        let dual = adjoint_via_dual(&pair, m).unwrap();
        let scale = direct.scale.max(dual.scale);
        prop_assert!(frob(&(direct.value.adjoint() - dual.value)) <= 1e-10 * scale);
    }

    #[test]
    fn quasi_order_zero_is_the_plain_residual(
        seed in any::<u64>(), d in 1usize..=5, m in 1u32..=4, delta in any::<bool>()
    ) {
        let (t, s, _) = triple(seed, d);
        let pair = OperatorPair::new(t, s, kind(delta)).unwrap();
        let quasi = quasi_residual(&pair, m, 0).unwrap();
        let plain = d_identity(&pair, m).unwrap();
        prop_assert!(frob(&(quasi.value - plain.value)) <= 1e-12 * plain.scale);
    }

    #[test]
    fn unitaries_are_quasi_isometries_of_every_order(
        seed in any::<u64>(), d in 1usize..=5, m in 1u32..=4, n in 0u32..=3
    ) {
        let u = random_unitary(&mut rng(seed), d);
        let pair = OperatorPair::adjoint_pair(&u, DKind::Delta).unwrap();
        let r = quasi_residual(&pair, m, n).unwrap();
        prop_assert!(r.norm() <= 1e-10 * r.scale);
    }

    #[test]
    fn left_inverse_pair_is_one_invertible(seed in any::<u64>(), d in 1usize..=5) {
        let s = complex_gaussian(&mut rng(seed), d, d);
        let t = inverse(&s).unwrap();
        let r = d_identity(&OperatorPair::new(t, s, DKind::Delta).unwrap(), 1).unwrap();
        prop_assert!(r.norm() <= 1e-9 * r.scale);
    }

    #[test]
    fn conjugation_is_an_involution(seed in any::<u64>(), d in 1usize..=6) {
        let mut g = rng(seed);
        let conj = random_conjugation(&mut g, d);
        let m = complex_gaussian(&mut g, d, d);
        let back = conj.cmc(&conj.cmc(&m).unwrap()).unwrap();
        prop_assert!(frob(&(back - &m)) <= 1e-12 * frob(&m));
    }
}

#[test]
fn delta_with_lower_companion() {
    let t = from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]]);
    let s = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let pair = OperatorPair::new(t, s, DKind::Delta).unwrap();
    let got = d_apply(&pair, &identity(2)).unwrap();
    assert_eq!(got, from_real_rows(&[&[0.0, 1.0], &[1.0, 1.0]]));
}

#[test]
fn corner_is_a_one_quasi_isometry_and_jordan_is_not() {
    let corner = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
    let pair = OperatorPair::adjoint_pair(&corner, DKind::Delta).unwrap();
    assert_eq!(frob(&quasi_residual(&pair, 1, 1).unwrap().value), 0.0);

    let jordan = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let pair = OperatorPair::adjoint_pair(&jordan, DKind::Delta).unwrap();
    assert!(frob(&quasi_residual(&pair, 2, 1).unwrap().value) > 0.5);
    assert_eq!(frob(&quasi_residual(&pair, 3, 1).unwrap().value), 0.0);
}

#[test]
fn scalar_isometry_vanishes_at_every_order() {
    let one = CMatrix::from_element(1, 1, c(1.0, 0.0));
    let pair = OperatorPair::adjoint_pair(&one, DKind::Delta).unwrap();
    for m in 1..=8 {
        assert_eq!(frob(&d_identity(&pair, m).unwrap().value), 0.0);
    }
    assert_eq!(mat_pow(&one, 5), one);
}
