use proptest::prelude::*;

use qil_core::classes::{check_membership, ClassFamily, ClassSpec};
use qil_core::generate::{
    conjugated_invertible_instance, conjugated_quasi_instance, gen_instance,
    invertible_class_instance, left_invertible_pair, perturbation_instance, product_instance,
    quasi_class_instance, unitary_quasi_instance,
};
use qil_core::linalg::{block, frob, identity, mat_pow};
use qil_core::random::{random_orthogonal, rng};
use qil_core::spectral::eigen_data;
use qil_core::structure::{
    construct_aqp, construct_b, construct_conjugated, left_inverse_cp, quasi_block_decompose,
    riesz_selfadjoint_criterion, verify_perturbation_theorem, verify_product_theorem,
};
use qil_core::{Conjugation, DKind, ToleranceConfig, Verdict};

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn kind(delta: bool) -> DKind {
    if delta {
        DKind::Delta
    } else {
        DKind::SmallDelta
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_reassemble(seed in any::<u64>(), d in 2usize..=6, delta in any::<bool>()) {
        let inst = quasi_class_instance(&mut rng(seed), d, kind(delta), 3, 2);
        let b = quasi_block_decompose(&inst.s, &inst.t, inst.n, &tol()).unwrap();
        prop_assert_eq!(b.d1 + b.d2, d);
        prop_assert_eq!(b.d1, inst.d1);
        let scale = frob(&inst.s);
        prop_assert!(frob(&(b.reassemble_s() - &inst.s)) <= 1e-10 * scale);
        prop_assert!(frob(&(b.w.adjoint() * &b.w - identity(d))) <= 1e-10);
        let sn = b.to_blocks(&mat_pow(&inst.s, inst.n));
        let corner = block(&sn, 0, b.d1, b.d1, b.d2);
        prop_assert!(frob(&(&corner - b.predicted_corner(inst.n))) <= 1e-9 * frob(&sn).max(1.0));
        prop_assert!(frob(&block(&sn, b.d1, 0, b.d2, d)) <= 1e-9 * frob(&sn).max(1.0));
    }

    #[test]
    fn weighted_similarity_on_quasi_members(
        seed in any::<u64>(), d in 2usize..=6, delta in any::<bool>()
    ) {
        let inst = quasi_class_instance(&mut rng(seed), d, kind(delta), 3, 2);
        let cert = construct_aqp(kind(delta), &inst.s, inst.m, inst.n, &tol()).unwrap();
        if delta {
            prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
            prop_assert!(cert.payload.contains_key("Q"));
        } else {
            // The δ similarity needs an injective S; a nilpotent corner breaks that.
            prop_assert_eq!(cert.verdict, Verdict::Vacuous);
            prop_assert_eq!(&cert.hypothesis_violations[0].name, "S injective");
        }
    }

    #[test]
    fn similarity_to_member_on_invertible_instances(
        seed in any::<u64>(), d in 1usize..=6, delta in any::<bool>()
    ) {
        let inst = invertible_class_instance(&mut rng(seed), d, kind(delta), 3);
        let cert = construct_b(kind(delta), &inst.s, inst.m, inst.n, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
        let b = &cert.payload["B"];
        let sn = mat_pow(&inst.s, inst.n);
        let tr = |m: &qil_core::CMatrix| m.trace();
        prop_assert!((tr(b) - tr(&sn)).norm() <= 1e-8 * frob(&sn).max(1.0));
    }

    #[test]
    fn conjugated_similarity_on_generated_members(seed in any::<u64>(), d in 2usize..=6) {
        let mut g = rng(seed);
        for inst in [conjugated_quasi_instance(&mut g, d, 3, 2), conjugated_invertible_instance(&mut g, d, 3)] {
            let conj = inst.conjugation.as_ref().unwrap();
            let cert = construct_conjugated(DKind::Delta, &inst.s, conj, inst.m, inst.n, &tol()).unwrap();
            prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
        }
    }

    #[test]
    fn left_inverse_of_powers(seed in any::<u64>(), d in 1usize..=6, p in 1u32..=3) {
        let pair = left_invertible_pair(&mut rng(seed), d, 3);
        let cert = left_inverse_cp(&pair.t, &pair.s, pair.m, p, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
    }

    #[test]
    fn riesz_verdicts_agree(seed in any::<u64>(), d in 2usize..=6) {
        let inst = unitary_quasi_instance(&mut rng(seed), d, 2, 0.5);
        for cl in eigen_data(&inst.s, &tol()).unwrap() {
            let cert = riesz_selfadjoint_criterion(&inst.s, &inst.t, inst.m, inst.n, cl.value, &tol()).unwrap();
            prop_assert_ne!(cert.verdict, Verdict::Failed, "{:#?}", cert);
        }
    }

    #[test]
    fn product_conclusion(seed in any::<u64>(), p in 2usize..=3, q in 1usize..=3, delta in any::<bool>()) {
        let k = kind(delta);
        let x = product_instance(&mut rng(seed), k, p, q, false);
        let cert = verify_product_theorem(k, &x.s, &x.s1, &x.t1, &x.s2, &x.t2, x.m1, x.m2, x.n, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
    }

    #[test]
    fn broken_commutation_is_vacuous(seed in any::<u64>(), p in 2usize..=3, q in 1usize..=3, delta in any::<bool>()) {
        let k = kind(delta);
        let x = product_instance(&mut rng(seed), k, p, q, true);
        let cert = verify_product_theorem(k, &x.s, &x.s1, &x.t1, &x.s2, &x.t2, x.m1, x.m2, x.n, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Vacuous);
        let y = perturbation_instance(&mut rng(seed), k, p, q, false, false, true);
        let cert = verify_perturbation_theorem(k, &y.s, &y.t, &y.n1_op, &y.n2_op, y.m, y.n, y.n1, y.n2, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Vacuous);
    }

    #[test]
    fn perturbation_conclusion(
        seed in any::<u64>(), p in 2usize..=3, q in 1usize..=3, delta in any::<bool>(), flat in any::<bool>()
    ) {
        let k = kind(delta);
        let y = perturbation_instance(&mut rng(seed), k, p, q, flat, false, false);
        let n = if flat { 0 } else { y.n };
        let cert = verify_perturbation_theorem(k, &y.s, &y.t, &y.n1_op, &y.n2_op, y.m, n, y.n1, y.n2, &tol()).unwrap();
        prop_assert_eq!(cert.verdict, Verdict::Passed, "{:#?}", cert);
        prop_assert_eq!(cert.diagnostics["order"], f64::from(y.m + y.n1 + y.n2 - 2));
    }

    #[test]
    fn generated_members_recheck(
        seed in any::<u64>(), d in 2usize..=6, m in 1u32..=4, n in 0u32..=2, f in 0usize..5
    ) {
        let spec = ClassSpec::new(ClassFamily::ALL[f], m, n);
        let inst = gen_instance(&spec, d, seed, &tol()).unwrap();
        let cert = check_membership(&inst.certificate.spec, &inst.s, Some(&inst.t), &tol()).unwrap();
        prop_assert!(cert.passed, "{:#?}", cert);
    }
}

#[test]
fn real_orthogonal_with_standard_conjugation() {
    let s = random_orthogonal(&mut rng(4), 3);
    let conj = Conjugation::standard(3);
    for (m, n) in [(1, 1), (2, 2)] {
        let cert = construct_conjugated(DKind::Delta, &s, &conj, m, n, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::Passed);
        assert!(frob(&(&cert.payload["Q"] - identity(3))) <= 1e-10);
    }
}
