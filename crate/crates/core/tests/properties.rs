//! Property tests of the pure building blocks.

use acb_core::adc::{run_adc, AdcSchedule};
use acb_core::problem::labels_equivalent;
use acb_core::rng::{keyed_rng, Domain};
use acb_core::sri::{RepresentativeSet, SriSchedule};
use acb_core::stats::{chi2_cdf, chi2_quantile, kl_bernoulli, normal_cdf, normal_quantile};
use acb_core::{balancedness, Bandit, Constants, Environment, InstanceSpec, Partition};
use proptest::prelude::*;

mod common;
use common::equivalent_by_permutation;

fn labels(k: usize, n: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..k, n)
}

proptest! {
    #[test]
    fn equivalence_is_reflexive_and_symmetric(a in labels(4, 12), b in labels(4, 12)) {
        prop_assert!(labels_equivalent(&a, &a).unwrap());
        prop_assert_eq!(labels_equivalent(&a, &b).unwrap(), labels_equivalent(&b, &a).unwrap());
    }

    #[test]
    fn equivalence_is_transitive(a in labels(3, 9), perm in Just(vec![2usize, 0, 1]), perm2 in Just(vec![1usize, 2, 0])) {
        let b: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        let c: Vec<usize> = b.iter().map(|&x| perm2[x]).collect();
        prop_assert!(labels_equivalent(&a, &b).unwrap());
        prop_assert!(labels_equivalent(&b, &c).unwrap());
        prop_assert!(labels_equivalent(&a, &c).unwrap());
    }

    #[test]
    fn equivalence_matches_permutation_search(k in 1usize..=5, a in labels(5, 10), b in labels(5, 10)) {
        let a: Vec<usize> = a.into_iter().map(|x| x % k).collect();
        let b: Vec<usize> = b.into_iter().map(|x| x % k).collect();
        prop_assert_eq!(labels_equivalent(&a, &b).unwrap(), equivalent_by_permutation(&a, &b, k));
    }

    #[test]
    fn balancedness_in_range(k in 1usize..6, extra in labels(6, 20)) {
        let mut l: Vec<usize> = (0..k).collect();
        l.extend(extra.into_iter().map(|x| x % k));
        let n = l.len();
        let th = balancedness(&Partition::new(l, k).unwrap());
        prop_assert!(th >= 1.0 / n as f64 - 1e-15 && th <= 1.0 / k as f64 + 1e-15);
    }

    #[test]
    fn kl_convex_in_second_argument(x in 0.01f64..0.99, y in 0.02f64..0.98) {
        let h = 1e-4;
        let f = |y: f64| kl_bernoulli(x, y).unwrap();
        let second = (f(y + h) - 2.0 * f(y) + f(y - h)) / (h * h);
        prop_assert!(second > 0.0);
        prop_assert!(f(y) >= 0.0);
    }

    #[test]
    fn normal_quantile_round_trip(p in 1e-9f64..(1.0 - 1e-9)) {
        let x = normal_quantile(p).unwrap();
        prop_assert!((normal_cdf(x) - p).abs() <= 1e-12 * p.min(1.0 - p).max(1e-3));
    }

    #[test]
    fn chi2_quantile_round_trip(dof in 1u32..2000, p in 0.001f64..0.999) {
        let x = chi2_quantile(dof, p).unwrap();
        prop_assert!((chi2_cdf(dof, x) - p).abs() < 1e-9);
    }

    #[test]
    fn sri_ladder_is_monotone(delta in 0.01f64..0.5, gap in 0.1f64..3.0, k in 2usize..20, d in 1usize..2000, theta_scale in 0.1f64..1.0) {
        let theta = theta_scale / k as f64;
        let s = SriSchedule::compute(delta, gap, theta, 1.0, k, d, &Constants::default()).unwrap();
        prop_assert!(s.sample_sizes.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.n_max >= *s.sample_sizes.last().unwrap());
        prop_assert!(s.s0 >= 1 && s.s0 <= s.r);
    }

    #[test]
    fn adc_budget_identity(n_per in 1usize..6, k in 1usize..6, d in 1usize..30, sigma in 0.0f64..0.6, seed in any::<u64>()) {
        let n = k * n_per;
        let spec = InstanceSpec::balanced_equidistant(n, k, d.max(k), sigma).unwrap();
        let mut env = Environment::new(spec, seed).unwrap();
        let mut reps = RepresentativeSet::default();
        for a in 0..k {
            let m = env.dual_empirical_mean(a, 1).unwrap();
            reps.insert(a, m);
        }
        let before = env.budget();
        let c = Constants::default();
        let out = run_adc(&mut env, 0.1, 1.0, &reps, &c).unwrap();
        let s = AdcSchedule::compute(0.1, 1.0, sigma, n, k, d.max(k), &c).unwrap();
        let expected = 2 * (n - k) as u64 * s.i + 2 * k as u64 * s.j;
        prop_assert_eq!(env.budget() - before, expected);
        prop_assert_eq!(out.budget, expected);
    }

    #[test]
    fn keyed_streams_differ_by_key(seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        prop_assume!(a != b);
        use rand::Rng;
        let x: u64 = keyed_rng(seed, Domain::Pull, &[a]).random();
        let y: u64 = keyed_rng(seed, Domain::Pull, &[b]).random();
        prop_assert_ne!(x, y);
    }
}
