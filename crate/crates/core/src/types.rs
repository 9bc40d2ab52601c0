//! Domain values shared by every stage: features, hypotheses, option sets,
//! probability vectors and the interaction history.
//!
//! Everything here is an immutable value. Indices are 0-based; the 1-based
//! convention only appears at serialization and HTTP/CLI boundaries.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Absolute tolerance for "sums to one".
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Rescale nonnegative weights so they sum to one.
///
/// Input that already sums to one up to floating-point accumulation error is
/// returned unchanged, which makes the operation exactly idempotent.
pub fn normalize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(CoreError::DegenerateInput("empty vector"));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::DegenerateInput("non-finite entry"));
    }
    if raw.iter().any(|&v| v < 0.0) {
        return Err(CoreError::DegenerateInput("negative entry"));
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(CoreError::DegenerateInput("all entries are zero"));
    }
    if (sum - 1.0).abs() <= accumulation_slack(raw.len()) {
        return Ok(raw.to_vec());
    }
    Ok(raw.iter().map(|v| v / sum).collect())
}

// Worst-case rounding in the sum of n values that were each divided by a
// common total.
fn accumulation_slack(n: usize) -> f64 {
    4.0 * f64::EPSILON * n as f64
}

/// Normalized item attributes, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CoreError::DimensionMismatch { expected: 1, actual: 0 });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(CoreError::FeatureOutOfRange { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = CoreError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(fv: FeatureVector) -> Self {
        fv.0
    }
}

/// A candidate preference weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: usize,
    pub weights: Vec<f64>,
}

impl Hypothesis {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Fixed, read-only table of distinct candidate preference vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisSet {
    dim: usize,
    hypotheses: Vec<Hypothesis>,
}

impl HypothesisSet {
    /// Builds the set, assigning ids `0..M` in input order.
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        let dim = weights.first().ok_or(CoreError::EmptyHypothesisSet)?.len();
        if dim == 0 {
            return Err(CoreError::DimensionMismatch { expected: 1, actual: 0 });
        }
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(weights.len());
        let mut hypotheses = Vec::with_capacity(weights.len());
        for (id, w) in weights.into_iter().enumerate() {
            if w.len() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    actual: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::InvalidConfig {
                    field: "hypothesis weights",
                    reason: format!("hypothesis {id} has a non-finite weight"),
                });
            }
            // +0.0 and -0.0 are the same preference.
            let key: Vec<u64> = w.iter().map(|v| (v + 0.0).to_bits()).collect();
            if let Some(&first) = seen.get(&key) {
                return Err(CoreError::DuplicateHypothesis { first, second: id });
            }
            seen.insert(key, id);
            hypotheses.push(Hypothesis { id, weights: w });
        }
        Ok(Self { dim, hypotheses })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Hypothesis> {
        self.hypotheses.get(id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Hypothesis> {
        self.hypotheses.iter()
    }

    /// Index of the hypothesis with exactly these weights.
    pub fn position(&self, weights: &[f64]) -> Option<usize> {
        self.hypotheses
            .iter()
            .position(|h| h.weights.len() == weights.len() && h.weights.iter().zip(weights).all(|(a, b)| a == b))
    }
}

impl<'a> IntoIterator for &'a HypothesisSet {
    type Item = &'a Hypothesis;
    type IntoIter = std::slice::Iter<'a, Hypothesis>;

    fn into_iter(self) -> Self::IntoIter {
        self.hypotheses.iter()
    }
}

/// The K items presented in one round, with the text each was rendered from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionSet {
    options: Vec<FeatureVector>,
    raw_texts: Vec<String>,
}

impl OptionSet {
    pub fn new(options: Vec<FeatureVector>, raw_texts: Vec<String>) -> Result<Self> {
        if options.len() < 2 {
            return Err(CoreError::TooFewOptions(options.len()));
        }
        if raw_texts.len() != options.len() {
            return Err(CoreError::TextCountMismatch {
                options: options.len(),
                texts: raw_texts.len(),
            });
        }
        let dim = options[0].dim();
        if let Some(bad) = options.iter().find(|o| o.dim() != dim) {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
        Ok(Self { options, raw_texts })
    }

    /// Option set without source texts; each option gets a generic label.
    pub fn from_features(options: Vec<FeatureVector>) -> Result<Self> {
        let texts = (1..=options.len()).map(|i| format!("Option {i}")).collect();
        Self::new(options, texts)
    }

    pub fn k(&self) -> usize {
        self.options.len()
    }

    pub fn dim(&self) -> usize {
        self.options[0].dim()
    }

    pub fn options(&self) -> &[FeatureVector] {
        &self.options
    }

    pub fn raw_texts(&self) -> &[String] {
        &self.raw_texts
    }

    /// Reorders options so that new position `i` holds old option `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.k(), "permutation length must equal K");
        Self {
            options: perm.iter().map(|&i| self.options[i].clone()).collect(),
            raw_texts: perm.iter().map(|&i| self.raw_texts[i].clone()).collect(),
        }
    }
}

/// A probability vector over the options of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OptionDistribution(Vec<f64>);

impl OptionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (index, &value) in probs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(CoreError::InvalidProbability { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(CoreError::NotNormalized { sum });
        }
        Ok(Self(probs))
    }

    /// Normalizes arbitrary nonnegative weights into a distribution.
    pub fn from_weights(raw: &[f64]) -> Result<Self> {
        normalize(raw).map(Self)
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k >= 1, "distribution needs at least one option");
        Self(vec![1.0 / k as f64; k])
    }

    pub fn one_hot(k: usize, index: usize) -> Self {
        assert!(index < k, "one-hot index out of range");
        let mut probs = vec![0.0; k];
        probs[index] = 1.0;
        Self(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Most probable option; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.0)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&i| self.0[i]).collect())
    }
}

impl TryFrom<Vec<f64>> for OptionDistribution {
    type Error = CoreError;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Self::new(probs)
    }
}

impl From<OptionDistribution> for Vec<f64> {
    fn from(d: OptionDistribution) -> Self {
        d.0
    }
}

impl AsRef<[f64]> for OptionDistribution {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One observed round: what was shown and what the user picked (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub options: OptionSet,
    pub choice: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionHistory {
    rounds: Vec<Round>,
}

impl InteractionHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, options: OptionSet, choice: usize) -> Result<()> {
        if choice >= options.k() {
            return Err(CoreError::ChoiceOutOfRange {
                index: choice,
                k: options.k(),
            });
        }
        self.rounds.push(Round { options, choice });
        Ok(())
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let mixed = [0.39 + 0.07, 0.26 + 0.28];
        let out = normalize(&mixed).unwrap();
        assert!((out[0] - 0.46).abs() < 1e-12);
        assert!((out[1] - 0.54).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_degenerate_input() {
        assert!(matches!(normalize(&[0.0, 0.0]), Err(CoreError::DegenerateInput(_))));
        assert!(matches!(
            normalize(&[1.0, f64::NAN]),
            Err(CoreError::DegenerateInput(_))
        ));
        assert!(matches!(
            normalize(&[1.0, f64::INFINITY]),
            Err(CoreError::DegenerateInput(_))
        ));
        assert!(matches!(normalize(&[1.0, -0.5]), Err(CoreError::DegenerateInput(_))));
        assert!(normalize(&[]).is_err());
    }

    #[test]
    fn feature_vector_bounds() {
        assert!(FeatureVector::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(matches!(
            FeatureVector::new(vec![0.2, 1.01]),
            Err(CoreError::FeatureOutOfRange { index: 1, .. })
        ));
        assert!(FeatureVector::new(vec![]).is_err());
        let parsed: std::result::Result<FeatureVector, _> = serde_json::from_str("[0.5, 2.0]");
        assert!(parsed.is_err());
    }

    #[test]
    fn hypothesis_set_rejects_duplicates_and_ragged_rows() {
        let err = HypothesisSet::new(vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap_err();
        assert_eq!(err, CoreError::DuplicateHypothesis { first: 0, second: 2 });
        assert!(HypothesisSet::new(vec![vec![0.0, 0.0], vec![-0.0, 0.0]]).is_err());
        assert!(HypothesisSet::new(vec![vec![1.0], vec![1.0, 0.0]]).is_err());
        assert_eq!(HypothesisSet::new(vec![]).unwrap_err(), CoreError::EmptyHypothesisSet);
        let h = HypothesisSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(h.get(1).unwrap().id, 1);
        assert_eq!(h.position(&[0.0, 1.0]), Some(1));
    }

    #[test]
    fn option_set_contract() {
        let fv = |v: f64| FeatureVector::new(vec![v, v]).unwrap();
        assert_eq!(
            OptionSet::from_features(vec![fv(0.1)]).unwrap_err(),
            CoreError::TooFewOptions(1)
        );
        assert!(OptionSet::new(vec![fv(0.1), fv(0.2)], vec!["a".into()]).is_err());
        let ragged = OptionSet::from_features(vec![fv(0.1), FeatureVector::new(vec![0.3]).unwrap()]);
        assert!(matches!(ragged, Err(CoreError::DimensionMismatch { .. })));
    }

    #[test]
    fn distribution_argmax_prefers_lowest_index_on_ties() {
        let d = OptionDistribution::new(vec![0.4, 0.4, 0.2]).unwrap();
        assert_eq!(d.argmax(), 0);
        assert_eq!(OptionDistribution::uniform(5).argmax(), 0);
        assert!(OptionDistribution::new(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn history_rejects_out_of_range_choice() {
        let fv = |v: f64| FeatureVector::new(vec![v]).unwrap();
        let x = OptionSet::from_features(vec![fv(0.1), fv(0.9)]).unwrap();
        let mut hist = InteractionHistory::new();
        assert!(hist.push(x.clone(), 2).is_err());
        hist.push(x, 1).unwrap();
        assert_eq!(hist.len(), 1);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(v in prop::collection::vec(0.0f64..1e6, 1..64)) {
            prop_assume!(v.iter().any(|&x| x > 0.0));
            let once = normalize(&v).unwrap();
            let twice = normalize(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn normalize_is_scale_invariant(
            v in prop::collection::vec(0.0f64..100.0, 1..64),
            c in 1e-3f64..1e3,
        ) {
            prop_assume!(v.iter().any(|&x| x > 1e-6));
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let a = normalize(&v).unwrap();
            let b = normalize(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            let sum: f64 = a.iter().sum();
            prop_assert!((sum - 1.0).abs() <= SUM_TOLERANCE);
        }
    }
}
