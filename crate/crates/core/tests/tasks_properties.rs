use adaptfuse_core::tasks::{stream_rng, DomainKind, DomainSchema, Episode, EpisodeSpec, SimulatedUser, Stream};
use adaptfuse_core::{BeliefEngine, FeatureVector, OptionDistribution, OptionSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn schemas() -> Vec<DomainSchema> {
    vec![
        DomainSchema::flight(),
        DomainSchema::hotel(),
        DomainSchema::synthetic(2).unwrap(),
        DomainSchema::synthetic(8).unwrap(),
    ]
}

#[test]
fn rendered_options_reparse_bit_identically() {
    for schema in schemas() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..10_000 {
            let raw = schema.sample_raw(&mut rng);
            let text = schema.render(1, &raw);
            let (expected, notes) = schema.normalize_raw(&raw);
            assert!(notes.is_empty());
            let parsed = schema.parse_option(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(parsed.notes.is_empty());
            let same = parsed
                .features
                .values()
                .iter()
                .zip(&expected)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            assert!(same, "{text}: {:?} vs {expected:?}", parsed.features.values());
        }
    }
}

#[test]
fn generated_sets_reparse_to_their_features() {
    for schema in schemas() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x = schema.generate_option_set(4, &mut rng);
            let again = schema.parse_option_set(x.raw_texts()).unwrap();
            assert_eq!(again, x);
        }
    }
}

#[test]
fn malformed_texts_fall_back_to_uniform_and_skip_the_update() {
    let schema = DomainSchema::flight();
    let texts = vec![
        "Flight 1: Departure time: 02:00 PM, Duration: 2hr 30min, Number of stops: 1, Price: $370".to_string(),
        "Flight 2: Departure time: noon, Duration: 3hr, Number of stops: 0, Price: $200".to_string(),
        "".to_string(),
    ];
    assert!(schema.parse_option(&texts[0]).is_ok());
    assert!(schema.parse_option(&texts[1]).is_err());
    assert!(schema.parse_option(&texts[2]).is_err());
    let parsed = schema.parse_option_set(&texts);
    assert!(parsed.is_none());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = adaptfuse_core::tasks::build_hypothesis_set(4, None, None, &mut rng);
    let engine = BeliefEngine::default();
    let belief = engine.uniform_prior(h.len());
    assert_eq!(
        engine.predictive_or_uniform(&belief, &h, parsed.as_ref(), 3),
        OptionDistribution::uniform(3)
    );
    assert_eq!(engine.update_or_skip(&belief, &h, parsed.as_ref(), 1), belief);
}

#[test]
fn user_choice_frequencies_match_luce_probabilities() {
    let fv = |v: &[f64]| FeatureVector::new(v.to_vec()).unwrap();
    let x = OptionSet::from_features(vec![fv(&[0.2, 0.9]), fv(&[0.5, 0.5]), fv(&[0.7, 0.3])]).unwrap();
    let user = SimulatedUser::new(vec![1.0, -0.5], Some(6.0));
    let probs = user.choice_probabilities(&x).unwrap();
    let n = 100_000;
    let mut counts = [0usize; 3];
    let mut rng = stream_rng(11, Stream::UserChoice);
    for _ in 0..n {
        counts[user.choose(&x, &mut rng)] += 1;
    }
    for (c, p) in counts.iter().zip(&probs) {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let dev = (*c as f64 - n as f64 * p).abs();
        assert!(
            dev <= 3.0 * sigma,
            "count {c}, expected {}, sigma {sigma}",
            n as f64 * p
        );
    }
}

#[test]
fn identical_options_are_chosen_uniformly() {
    let fv = FeatureVector::new(vec![0.4, 0.6]).unwrap();
    let x = OptionSet::from_features(vec![fv.clone(), fv.clone(), fv]).unwrap();
    let user = SimulatedUser::new(vec![1.0, 1.0], Some(6.0));
    assert_eq!(user.choice_probabilities(&x).unwrap(), vec![1.0 / 3.0; 3]);
    let deterministic = SimulatedUser::new(vec![1.0, -1.0], None);
    let fv = |v: &[f64]| FeatureVector::new(v.to_vec()).unwrap();
    let y = OptionSet::from_features(vec![fv(&[0.1, 0.9]), fv(&[0.9, 0.1])]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!((0..100).all(|_| deterministic.choose(&y, &mut rng) == 1));
}

#[test]
fn episodes_are_pure_functions_of_the_spec() {
    for domain in [DomainKind::Flight, DomainKind::Hotel, DomainKind::Synthetic] {
        let spec = EpisodeSpec {
            domain,
            d: (domain == DomainKind::Synthetic).then_some(5),
            seed: 31,
            max_hypotheses: Some(200),
            ..Default::default()
        };
        let a = Episode::generate(&spec).unwrap();
        let b = Episode::generate(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.true_index.is_some());
        for (x, y) in a.rounds.iter().zip(&b.rounds) {
            assert_eq!(x.raw_texts(), y.raw_texts());
        }
    }
}

#[test]
fn reference_template_values() {
    let flight = DomainSchema::flight();
    let p = flight
        .parse_option("Flight 1: Departure time: 02:00 PM, Duration: 2hr 30min, Number of stops: 1, Price: $370")
        .unwrap();
    let v = p.features.values();
    assert_eq!(v[0], 0.5);
    assert!((v[1] - 2.0 / 19.5).abs() < 1e-15);
    assert_eq!(v[2], 0.5);
    assert_eq!(v[3], 0.3);

    let hotel = DomainSchema::hotel();
    let p = hotel
        .parse_option(
            "Hotel 2: Distance to downtown: 3 miles, Price: $820, Rating: 5 stars, Amenities: free wifi, pool and gym",
        )
        .unwrap();
    assert_eq!(p.features.values()[1], 1.0);
    assert_eq!(p.features.values()[2], 1.0);
    assert_eq!(p.raw[3], 3.0);
    assert!(p.notes.iter().any(|n| n.contains("price")));
}
