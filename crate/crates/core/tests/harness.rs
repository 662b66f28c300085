use proptest::prelude::*;

use qil_core::harness::{run_suite, run_trial, DimRange, Suite, SuiteConfig};
use qil_core::random::sub_seed;

fn config(suites: Vec<Suite>, trials: usize, seed: u64) -> SuiteConfig {
    SuiteConfig {
        suites,
        trials,
        seed,
        ..SuiteConfig::default()
    }
}

#[test]
fn single_calculus_trial_passes() {
    let cfg = SuiteConfig {
        dims: DimRange { min: 2, max: 2 },
        ..config(vec![Suite::Calculus], 1, 0)
    };
    let report = run_suite(&cfg).unwrap();
    let stats = &report.suites["calculus"];
    assert_eq!((stats.trials, stats.passed), (1, 1));
    assert!(report.overall);
}

#[test]
fn sabotage_makes_every_trial_vacuous() {
    for suite in [Suite::Thm01, Suite::Thm30] {
        let cfg = SuiteConfig {
            sabotage: true,
            ..config(vec![suite], 10, 3)
        };
        let report = run_suite(&cfg).unwrap();
        let stats = &report.suites[suite.name()];
        assert_eq!((stats.vacuous, stats.failed), (10, 0), "{}", suite.name());
        assert!(report.overall);
    }
}

#[test]
fn reports_are_byte_identical() {
    let cfg = config(Suite::ALL.to_vec(), 12, 42);
    let a = run_suite(&cfg).unwrap().to_json();
    let b = run_suite(&cfg).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn suite_order_and_duplicates_do_not_matter() {
    let forward = config(vec![Suite::Pro10, Suite::Calculus], 5, 8);
    let backward = config(vec![Suite::Calculus, Suite::Pro10, Suite::Calculus], 5, 8);
    let (a, b) = (run_suite(&forward).unwrap(), run_suite(&backward).unwrap());
    assert_eq!(a.suites, b.suites);
}

#[test]
fn seeds_are_distinct_per_suite_and_index() {
    let mut seen = std::collections::BTreeSet::new();
    for suite in Suite::ALL {
        for i in 0..50 {
            assert!(seen.insert(sub_seed(7, suite.name(), i)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// A trial depends only on `(seed, suite, index)`, not on how many trials run.
    #[test]
    fn trials_are_independent(seed in any::<u64>(), index in 0u64..20, extra in 1usize..30, s in 0usize..9) {
        let suite = Suite::ALL[s];
        let small = config(vec![suite], index as usize + 1, seed);
        let large = config(vec![suite], index as usize + 1 + extra, seed);
        let a = run_trial(suite, &small, index);
        let b = run_trial(suite, &large, index);
        prop_assert_eq!(a.seed, b.seed);
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.worst_residual.to_bits(), b.worst_residual.to_bits());
    }

    #[test]
    fn correct_generators_never_fail(seed in any::<u64>(), s in 0usize..9) {
        let suite = Suite::ALL[s];
        let report = run_suite(&config(vec![suite], 8, seed)).unwrap();
        let stats = &report.suites[suite.name()];
        prop_assert_eq!(stats.failed, 0, "seeds {:?}", stats.exemplar_seeds);
    }
}
