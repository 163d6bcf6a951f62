use bvs_core::{
    enumerate_posterior, generate_synthetic, incomplete_beta_cdf, log_bayes_factor, noncentral_beta_cdf, BfMethod,
    ModelPrior, ModelSubset, QuadratureSpec,
};
use proptest::prelude::*;

const Q: QuadratureSpec = QuadratureSpec { rel_tol: 1e-10, max_refinements: 20, initial_panels: 64 };

fn method() -> impl Strategy<Value = BfMethod> {
    prop_oneof![Just(BfMethod::Gn), Just(BfMethod::Mix), Just(BfMethod::Ip), Just(BfMethod::Schwarz)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_bf_strictly_decreases_in_b(m in method(), n in 8usize..400, j_frac in 0.0f64..1.0) {
        let j = 1 + ((n - 4) as f64 * j_frac) as usize;
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let b = i as f64 / 100.0;
            let v = log_bayes_factor(m, n, j, b, &Q).unwrap().log_value;
            prop_assert!(v.is_finite());
            prop_assert!(v < prev, "{m} n={n} j={j} b={b}: {v} !< {prev}");
            prev = v;
        }
    }

    #[test]
    fn quadrature_is_stable_under_panel_doubling(n in 10usize..2000, j_frac in 0.0f64..1.0, b in 1e-6f64..1.0) {
        let j = 1 + ((n - 4) as f64 * j_frac) as usize;
        let wide = QuadratureSpec { initial_panels: 128, ..Q };
        for m in [BfMethod::Mix, BfMethod::Ip] {
            let a = log_bayes_factor(m, n, j, b, &Q).unwrap().log_value;
            let c = log_bayes_factor(m, n, j, b, &wide).unwrap().log_value;
            prop_assert!((a - c).abs() <= 1e-10 * a.abs().max(1.0) * 2.0, "{m} {n} {j} {b}: {a} vs {c}");
        }
    }

    #[test]
    fn subset_text_round_trips(mask in 0u64..(1 << 20)) {
        let s = ModelSubset::from_mask(mask);
        prop_assert_eq!(s.to_string().parse::<ModelSubset>().unwrap(), s.clone());
        prop_assert_eq!(s.mask(), mask);
    }

    #[test]
    fn beta_cdfs_are_monotone_probabilities(a in 0.5f64..60.0, b in 0.5f64..30.0, lambda in 0.0f64..200.0) {
        let mut prev = 0.0;
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            let f = noncentral_beta_cdf(x, a, b, lambda).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= prev - 1e-14);
            prop_assert!(f >= incomplete_beta_cdf(x, a, b).unwrap() - 1e-14);
            prev = f;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn posterior_tables_are_normalized(seed in any::<u64>(), k in 1usize..7, theta in 0.05f64..0.95, m in method()) {
        let truth = ModelSubset::from_mask(1);
        let data = generate_synthetic(30, k, &truth, &[0.0, 0.8], 1.0, 0.3, seed).unwrap();
        for prior in [ModelPrior::HierarchicalUniform, ModelPrior::Uniform, ModelPrior::bernoulli(theta).unwrap()] {
            let t = enumerate_posterior(&data, m, prior, &Q).unwrap();
            prop_assert!((t.total() - 1.0).abs() < 1e-10);
            prop_assert!(t.entries().iter().all(|e| (0.0..=1.0).contains(&e.posterior)));
            prop_assert!(t.inclusion_probabilities().iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
}

#[test]
fn intrinsic_penalizes_dimension_least() {
    for n in [30usize, 60, 90, 150, 300] {
        let j = n / 3;
        for b in [0.3, 0.5, 0.7, 0.9] {
            let v = |m| log_bayes_factor(m, n, j, b, &Q).unwrap().log_value;
            assert!(v(BfMethod::Ip) >= v(BfMethod::Mix), "n={n} b={b}");
            assert!(v(BfMethod::Ip) >= v(BfMethod::Gn), "n={n} b={b}");
        }
    }
}
