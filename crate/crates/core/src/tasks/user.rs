use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::choice::{dot, ChoiceModel};
use crate::types::{argmax_lowest, OptionSet};

/// A user with a fixed latent preference vector.
///
/// With `beta = None` the user always takes the highest-utility option;
/// otherwise choices follow the Luce rule at that inverse temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedUser {
    pub weights: Vec<f64>,
    pub beta: Option<f64>,
}

impl SimulatedUser {
    pub fn new(weights: Vec<f64>, beta: Option<f64>) -> Self {
        if let Some(b) = beta {
            assert!(b.is_finite() && b > 0.0, "user beta must be positive");
        }
        Self { weights, beta }
    }

    /// The option this user's utility ranks highest (lowest index on ties).
    pub fn preferred(&self, options: &OptionSet) -> usize {
        argmax_lowest(&self.utilities(options))
    }

    pub fn utilities(&self, options: &OptionSet) -> Vec<f64> {
        options
            .options()
            .iter()
            .map(|x| dot(&self.weights, x.values()))
            .collect()
    }

    pub fn choice_probabilities(&self, options: &OptionSet) -> Option<Vec<f64>> {
        let beta = self.beta?;
        let model = ChoiceModel::new(beta).expect("validated at construction");
        let mut out = vec![0.0; options.k()];
        model.choice_probs_into(&self.weights, options, &mut out);
        Some(out)
    }

    pub fn choose<R: Rng + ?Sized>(&self, options: &OptionSet, rng: &mut R) -> usize {
        match self.choice_probabilities(options) {
            None => self.preferred(options),
            Some(probs) => {
                let u: f64 = rng.random();
                let mut cumulative = 0.0;
                for (i, p) in probs.iter().enumerate() {
                    cumulative += p;
                    if u < cumulative {
                        return i;
                    }
                }
                probs.len() - 1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FeatureVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn options(values: &[f64]) -> OptionSet {
        OptionSet::from_features(
            values
                .iter()
                .map(|&v| FeatureVector::new(vec![v, 1.0 - v]).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_user_takes_argmax() {
        let user = SimulatedUser::new(vec![1.0, 0.0], None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(user.choose(&options(&[0.2, 0.9, 0.4]), &mut rng), 1);
        }
    }

    #[test]
    fn identical_options_are_chosen_uniformly() {
        let user = SimulatedUser::new(vec![1.0, -0.5], Some(6.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = options(&[0.3, 0.3, 0.3]);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[user.choose(&x, &mut rng)] += 1;
        }
        for c in counts {
            let freq = c as f64 / n as f64;
            // sd = sqrt(1/3 * 2/3 / n) ~ 0.0027
            assert!((freq - 1.0 / 3.0).abs() < 4.0 * 0.0028, "freq {freq}");
        }
    }
}
