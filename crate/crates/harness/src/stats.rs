//! Small statistics helpers for seed-level summaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean from the unbiased sample variance; 0 for n < 2.
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Counts of positive and negative entries; zeros are ties and dropped.
pub fn signs(diffs: &[f64]) -> (usize, usize) {
    let pos = diffs.iter().filter(|&&d| d > 0.0).count();
    let neg = diffs.iter().filter(|&&d| d < 0.0).count();
    (pos, neg)
}

/// Exact one-sided sign-test p-value for "differences tend to be positive":
/// `P(X ≥ pos)` with `X ~ Binomial(pos + neg, 1/2)`. Ties are dropped; with no
/// untied pairs the p-value is 1.
pub fn sign_test_greater(diffs: &[f64]) -> f64 {
    let (pos, neg) = signs(diffs);
    binomial_upper_tail(pos + neg, pos)
}

/// `P(X ≥ k)` for `X ~ Binomial(n, 1/2)`, summed in log space.
fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if n == 0 || k == 0 {
        return 1.0;
    }
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    // ln C(n, i) built incrementally.
    let mut ln_choose = 0.0;
    let mut tail = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            tail += (ln_choose + ln_half_n).exp();
        }
    }
    tail.min(1.0)
}

/// Percentile bootstrap of the mean over contiguous blocks of `block` values.
/// Returns `(point_mean, lower, upper)` for a central `level` interval.
///
/// A trailing partial block is kept as its own (shorter) block.
pub fn block_bootstrap_mean(values: &[f64], block: usize, reps: usize, level: f64, seed: u64) -> (f64, f64, f64) {
    assert!(block >= 1 && reps >= 1 && !values.is_empty());
    assert!(level > 0.0 && level < 1.0);
    let blocks: Vec<&[f64]> = values.chunks(block).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..reps)
        .map(|_| {
            let mut sum = 0.0;
            let mut n = 0usize;
            for _ in 0..blocks.len() {
                let b = blocks[rng.random_range(0..blocks.len())];
                sum += b.iter().sum::<f64>();
                n += b.len();
            }
            sum / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let at = |q: f64| means[((q * reps as f64).floor() as usize).min(reps - 1)];
    (mean(values), at(alpha), at(1.0 - alpha))
}
