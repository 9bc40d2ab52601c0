use adaptfuse_core::fusion::adaptive_weights;
use adaptfuse_core::{fuse, normalized_entropy, FusionConfig, OptionDistribution};
use proptest::prelude::*;

/// Distributions with some exact zeros mixed in, so support edge cases show up.
fn distribution(k: usize) -> impl Strategy<Value = OptionDistribution> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..1.0], k)
        .prop_filter_map("all zero", |w| OptionDistribution::from_weights(&w).ok())
}

fn pair() -> impl Strategy<Value = (OptionDistribution, OptionDistribution)> {
    (2usize..=8).prop_flat_map(|k| (distribution(k), distribution(k)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn llm_share_respects_bound((llm, sym) in pair()) {
        let out = fuse(&llm, &sym, &FusionConfig::default());
        let d = out.diagnostics;
        prop_assert!(d.llm_share <= 1.0 / (1.0 + d.w_sym) + 1e-12);
        prop_assert!(d.w_llm >= 1e-3 && d.w_llm <= 1.0);
        prop_assert!(d.w_sym >= 1e-3 && d.w_sym <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn swapping_arguments_gives_the_same_fusion((a, b) in pair()) {
        let ab = fuse(&a, &b, &FusionConfig::default());
        let ba = fuse(&b, &a, &FusionConfig::default());
        prop_assert_eq!(ab.diagnostics.w_llm, ba.diagnostics.w_sym);
        for (x, y) in ab.fused.probs().iter().zip(ba.fused.probs()) {
            prop_assert!((x - y).abs() <= 1e-15);
        }
    }

    #[test]
    fn fused_support_covers_both_inputs((a, b) in pair()) {
        let out = fuse(&a, &b, &FusionConfig::default());
        prop_assert!((out.fused.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for i in 0..a.k() {
            if a.probs()[i] > 0.0 || b.probs()[i] > 0.0 {
                prop_assert!(out.fused.probs()[i] > 0.0);
            }
        }
        prop_assert_eq!(out.chosen, out.fused.argmax());
    }

    #[test]
    fn fixed_half_matches_adaptive_at_equal_entropy(
        a in (2usize..=6).prop_flat_map(distribution),
        rot in 0usize..6,
    ) {
        // A permutation of `a` has the same entropy, up to summation order.
        let k = a.k();
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        let b = a.permuted(&perm);
        prop_assert!((normalized_entropy(&a) - normalized_entropy(&b)).abs() <= 1e-15);
        let adaptive = fuse(&a, &b, &FusionConfig::default());
        let fixed = fuse(&a, &b, &FusionConfig::fixed(0.5));
        for (x, y) in adaptive.fused.probs().iter().zip(fixed.fused.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn bound_decreases_in_symbolic_weight() {
    let grid: Vec<f64> = (0..=1000).map(|i| 1e-3 + (1.0 - 1e-3) * i as f64 / 1000.0).collect();
    for w in grid.windows(2) {
        assert!(1.0 / (1.0 + w[1]) < 1.0 / (1.0 + w[0]));
    }
    // The same ordering through the public diagnostics: a sharper symbolic
    // input never loosens the bound.
    let llm = OptionDistribution::uniform(3);
    let mut last = f64::INFINITY;
    for i in 0..=50 {
        let p = 1.0 / 3.0 + (2.0 / 3.0) * i as f64 / 50.0;
        let q = (1.0 - p) / 2.0;
        let sym = OptionDistribution::new(vec![p, q, q]).unwrap();
        let (_, w_sym) = adaptive_weights(&llm, &sym, 1e-3);
        let bound = fuse(&llm, &sym, &FusionConfig::default()).diagnostics.bound;
        assert!((bound - 1.0 / (1.0 + w_sym)).abs() < 1e-15);
        assert!(bound <= last);
        last = bound;
    }
    assert!((last - 0.5).abs() < 1e-12);
}
