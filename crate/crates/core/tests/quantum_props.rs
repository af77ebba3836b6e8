mod common;

use common::{random_agreeing_realization, random_e00_realization, random_realization};
use dw_core::behavior::{chsh_witness, correlator, is_no_signalling, lhv_reconstruct, make_pr_box};
use dw_core::quantum::{born_behavior, sos_residual};
use dw_core::{Behavior, BehaviorError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Convex combination of behaviors, entry by entry.
fn mix(parts: &[(f64, Behavior)]) -> Behavior {
    Behavior::from_fn(|b1, b2, x1, x2| parts.iter().map(|(w, b)| w * b.p(b1, b2, x1, x2)).sum()).unwrap()
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn born_behaviors_are_no_signalling(seed in any::<u64>(), d1 in 2usize..=3, d2 in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = born_behavior(&random_realization(d1, d2, &mut rng));
        prop_assert!(is_no_signalling(&b, 1e-10));
        for x1 in 0..2 {
            for x2 in 0..2 {
                let s: f64 = (0..4).map(|k| b.p(k / 2, k % 2, x1, x2)).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sos_residual_matches_chsh_gap(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_e00_realization(&mut rng);
        let b = born_behavior(&r);
        prop_assume!((correlator(&b, 0, 0) - 1.0).abs() < 1e-10);
        let gap = 2.5 - chsh_witness(&b).chsh;
        prop_assert!((sos_residual(&r).unwrap() - gap).abs() < 1e-8);
        prop_assert!(gap > -1e-10);
    }

    #[test]
    fn agreeing_quantum_behaviors_are_local(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..k).map(|_| rand::Rng::random_range(&mut rng, 0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let parts: Vec<(f64, Behavior)> =
            weights.iter().map(|w| (w / total, born_behavior(&random_agreeing_realization(&mut rng)))).collect();
        let b = mix(&parts);
        let m = lhv_reconstruct(&b, 1e-9).unwrap();
        prop_assert!(m.error < 1e-9);
        prop_assert!(chsh_witness(&m.behavior).chsh <= 2.0 + 1e-9);
        prop_assert!(chsh_witness(&b).chsh <= 2.0 + 1e-9);
    }
}

#[test]
fn pr_box_has_no_local_model() {
    assert!(matches!(lhv_reconstruct(&make_pr_box(), 1e-9), Err(BehaviorError::ReconstructionMismatch { .. })));
}
