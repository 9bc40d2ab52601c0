use adaptfuse_core::aggregation::{
    dirichlet_aggregate, majority_vote, sample_batch, sample_weights, DirichletAccumulator, MomentumMemory, Sample,
    SampleBatch, SampleRequest, SamplerConfig, SamplerError, SemanticSampler,
};
use adaptfuse_core::{FeatureVector, InteractionHistory, OptionDistribution, OptionSet};
use proptest::prelude::*;

fn batch_strategy() -> impl Strategy<Value = (usize, Vec<Option<(usize, f64)>>)> {
    (2usize..=8).prop_flat_map(|k| {
        (
            Just(k),
            prop::collection::vec(prop::option::weighted(0.85, (0..k, 0.0f64..=1.0)), 0..=12),
        )
    })
}

fn to_batch(raw: &[Option<(usize, f64)>]) -> SampleBatch {
    SampleBatch::new(
        raw.iter()
            .map(|s| match s {
                Some((p, c)) => Sample::valid(*p, *c),
                None => Sample::failed(),
            })
            .collect(),
    )
}

fn distribution(k: usize) -> impl Strategy<Value = OptionDistribution> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|w| OptionDistribution::from_weights(&w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn batch_and_incremental_aggregation_agree((k, raw) in batch_strategy(), alpha0 in 0.1f64..3.0) {
        let batch = to_batch(&raw);
        let batched = dirichlet_aggregate(&batch, k, alpha0);
        let mut acc = DirichletAccumulator::new(k, alpha0);
        // Feed in reverse to make the order-independence explicit.
        for (p, c) in batch.valid().collect::<Vec<_>>().into_iter().rev() {
            let before: f64 = acc.alpha().iter().sum();
            acc.observe(p, c);
            let after: f64 = acc.alpha().iter().sum();
            prop_assert!((after - before - 1.0).abs() <= 1e-12);
            prop_assert!(acc.alpha().iter().all(|&a| a >= alpha0));
        }
        for (a, b) in batched.probs().iter().zip(acc.mean().probs()) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn sample_weights_are_distributions(k in 2usize..=10, c in 0.0f64..=1.0, seed in any::<usize>()) {
        let w = sample_weights(seed % k, c, k);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn aggregate_has_full_support((k, raw) in batch_strategy(), alpha0 in 0.1f64..3.0) {
        let batch = to_batch(&raw);
        let pi = dirichlet_aggregate(&batch, k, alpha0);
        let n = batch.valid_count() as f64;
        let floor = alpha0 / (alpha0 * k as f64 + n);
        for &p in pi.probs() {
            prop_assert!(p >= floor - 1e-15, "{p} < {floor}");
        }
    }

    #[test]
    fn raising_confidence_raises_predicted_mass(
        (k, raw) in batch_strategy(),
        pred_seed in any::<usize>(),
        c in 0.0f64..0.99,
        bump in 0.005f64..0.5,
    ) {
        let p = pred_seed % k;
        let mut low = raw.clone();
        low.push(Some((p, c)));
        let mut high = raw;
        high.push(Some((p, (c + bump).min(1.0))));
        let a = dirichlet_aggregate(&to_batch(&low), k, 1.0);
        let b = dirichlet_aggregate(&to_batch(&high), k, 1.0);
        prop_assert!(b.probs()[p] > a.probs()[p]);
    }

    #[test]
    fn smoothing_is_convex(
        (mem, raw) in (2usize..=6).prop_flat_map(|k| (distribution(k), distribution(k))),
        m in 0.0f64..0.99,
    ) {
        let (_, memory) = MomentumMemory::new(m).smooth(&mem);
        let (out, _) = memory.smooth(&raw);
        prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for ((o, a), b) in out.probs().iter().zip(mem.probs()).zip(raw.probs()) {
            let expected = m * a + (1.0 - m) * b;
            prop_assert!((o - expected).abs() <= 1e-12);
            prop_assert!(*o >= a.min(*b) - 1e-12 && *o <= a.max(*b) + 1e-12);
        }
    }

    #[test]
    fn majority_vote_ignores_confidence((k, raw) in batch_strategy(), shift in 0usize..12) {
        let batch = to_batch(&raw);
        let confs: Vec<f64> = raw.iter().flatten().map(|(_, c)| *c).collect();
        let mut rotated = raw.clone();
        for (i, s) in rotated.iter_mut().flatten().enumerate() {
            s.1 = confs[(i + shift) % confs.len()];
        }
        prop_assert_eq!(majority_vote(&batch, k), majority_vote(&to_batch(&rotated), k));
    }
}

struct Fixed(&'static str);

impl SemanticSampler for Fixed {
    fn complete(&mut self, _: &SampleRequest<'_>) -> Result<String, SamplerError> {
        Ok(self.0.to_string())
    }
}

struct Recording {
    temperatures: Vec<f64>,
    hints: Vec<String>,
}

impl SemanticSampler for Recording {
    fn complete(&mut self, request: &SampleRequest<'_>) -> Result<String, SamplerError> {
        self.temperatures.push(request.temperature);
        self.hints.push(request.hint.to_string());
        if request.sample_index == 3 {
            return Err(SamplerError::Transport("connection reset".into()));
        }
        Ok("ANSWER: 1 CONFIDENCE: 0.6".into())
    }
}

fn three_options() -> OptionSet {
    OptionSet::from_features(
        (0..3)
            .map(|i| FeatureVector::new(vec![i as f64 / 2.0]).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn fixed_answer_sampler_yields_full_batch() {
    let x = three_options();
    let batch = sample_batch(
        &mut Fixed("Option 2 looks best.\nANSWER: 2 CONFIDENCE: 0.9"),
        &x,
        &InteractionHistory::new(),
        &SamplerConfig::default(),
    );
    assert_eq!(batch.len(), 5);
    assert_eq!(batch.valid_count(), 5);
    assert!(batch.valid().all(|s| s == (1, 0.9)));
}

#[test]
fn garbage_sampler_yields_uniform_aggregate() {
    let x = three_options();
    let batch = sample_batch(
        &mut Fixed("I cannot decide."),
        &x,
        &InteractionHistory::new(),
        &SamplerConfig::default(),
    );
    assert_eq!(batch.valid_count(), 0);
    assert_eq!(dirichlet_aggregate(&batch, 3, 1.0), OptionDistribution::uniform(3));
}

#[test]
fn temperatures_and_hints_cycle_on_the_sample_index() {
    let mut s = Recording {
        temperatures: vec![],
        hints: vec![],
    };
    let cfg = SamplerConfig::default();
    let batch = sample_batch(&mut s, &three_options(), &InteractionHistory::new(), &cfg);
    assert_eq!(s.temperatures, vec![0.2, 0.7, 1.0, 0.2, 0.7]);
    assert_eq!(s.hints[4], s.hints[0]);
    assert_eq!(s.hints[3], cfg.hint_pool[3]);
    // The transport failure on one call marks only that sample.
    assert_eq!(batch.valid_count(), 4);
    assert!(!batch.samples()[3].is_valid());
}
