use dw_core::snm::{nelder_mead, snm_minimize, SnmConfig, SnmResult, StepKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const CENTER: [f64; 4] = [0.3, -0.5, 0.7, 0.1];

fn sphere(x: &[f64]) -> f64 {
    x.iter().zip(&CENTER).map(|(a, c)| (a - c) * (a - c)).sum()
}

fn cfg(max_evals: usize, seed: u64) -> SnmConfig {
    SnmConfig::new(vec![(-2.0, 2.0); 4], max_evals, seed)
}

/// Re-derives every acceptance decision from the recorded ranks.
fn check_trace(r: &SnmResult, c: &SnmConfig) {
    let t = &r.trace;
    assert_eq!(t.len(), r.evals);
    assert!(r.evals <= c.max_evals);
    for (i, e) in t.iter().enumerate() {
        assert_eq!(e.eval, i);
        for (k, &(lo, hi)) in c.bounds.iter().enumerate() {
            assert!(lo <= e.x[k] && e.x[k] <= hi, "eval {i} leaves the box");
        }
        let Some([f_min, f_2nd, f_max]) = e.ranks else {
            assert_eq!(e.kind, StepKind::Initial);
            assert!(e.accepted);
            continue;
        };
        let v = e.value;
        match e.kind {
            StepKind::Initial => panic!("initial point with ranks"),
            StepKind::Reflection => {
                let expanded = t.get(i + 1).is_some_and(|n| n.kind == StepKind::Expansion && n.accepted);
                if e.accepted {
                    assert!(v < f_2nd, "eval {i}");
                    assert!(!expanded);
                } else {
                    assert!(v >= f_2nd || expanded, "eval {i}");
                }
            }
            StepKind::Expansion => {
                let f_ref = e.f_ref.unwrap();
                assert!(f_ref < f_min);
                assert_eq!(e.accepted, v < f_ref, "eval {i}");
            }
            StepKind::OutsideContraction => {
                let f_ref = e.f_ref.unwrap();
                assert!(f_2nd <= f_ref && f_ref < f_max);
                assert_eq!(e.accepted, v <= f_ref, "eval {i}");
            }
            StepKind::InsideContraction => {
                assert!(e.f_ref.unwrap() >= f_max);
                assert_eq!(e.accepted, v <= f_max, "eval {i}");
            }
            StepKind::ArsGlobal => assert_eq!(e.accepted, v < f_max, "eval {i}"),
            StepKind::ArsLocal => {
                assert_eq!(e.accepted, v < f_max, "eval {i}");
                let center = e.center.as_ref().unwrap();
                let q: f64 = (0..c.dim())
                    .map(|k| {
                        let w = c.ars_radius * (c.bounds[k].1 - c.bounds[k].0);
                        ((e.x[k] - center[k]) / w).powi(2)
                    })
                    .sum();
                assert!(q <= 1.0 + 1e-9, "eval {i} outside the local ball: {q}");
            }
            StepKind::Shrink => panic!("shrink step in a stochastic run"),
        }
    }
    assert!(r.simplex_sizes.iter().all(|&s| s == c.dim() + 1));
    assert_eq!(r.simplex.len(), c.dim() + 1);
    let best = t.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    assert_eq!(r.best_value, best);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn noisy_runs_obey_the_step_rules(seed in any::<u64>(), noise in 0.0f64..0.2, p in 0.0f64..=1.0, n in 5usize..400) {
        let mut c = cfg(n, seed);
        c.p_global = p;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let normal = Normal::new(0.0, noise.max(1e-12)).unwrap();
        let r = snm_minimize(|x| sphere(x) + normal.sample(&mut rng), &c).unwrap();
        check_trace(&r, &c);
    }

    #[test]
    fn identical_seeds_give_identical_traces(seed in any::<u64>()) {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let normal = Normal::new(0.0, 0.05).unwrap();
            snm_minimize(|x| sphere(x) + normal.sample(&mut rng), &cfg(200, seed)).unwrap()
        };
        prop_assert_eq!(run(), run());
    }
}

#[test]
fn noiseless_sphere_within_350_evals() {
    let hits = (0..100u64)
        .filter(|&s| snm_minimize(sphere, &cfg(350, s)).unwrap().best_value < 1e-4)
        .count();
    println!("sphere: {hits}/100 seeds below 1e-4 in 350 evaluations");
    assert!(hits >= 95, "{hits}/100");
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
}

#[test]
fn random_search_beats_plain_simplex_under_noise() {
    let noisy = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 << 32));
        let normal = Normal::new(0.0, 0.05).unwrap();
        move |x: &[f64]| sphere(x) + normal.sample(&mut rng)
    };
    let (mut snm, mut nm) = (Vec::new(), Vec::new());
    for s in 0..50u64 {
        // scored on the true objective at the returned point
        snm.push(sphere(&snm_minimize(noisy(s), &cfg(350, s)).unwrap().best_x));
        nm.push(sphere(&nelder_mead(noisy(s), &cfg(350, s)).unwrap().best_x));
    }
    let (a, b) = (median(snm), median(nm));
    println!("noisy sphere medians: snm {a:.4e}, nelder-mead {b:.4e}");
    assert!(a < b, "{a} vs {b}");
}
