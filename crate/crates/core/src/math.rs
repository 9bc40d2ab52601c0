//! Small numerically careful helpers over `f64` slices.

/// `ln Σ exp(x_i)` computed around the maximum.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Writes `softmax(scale * scores)` into `out`, subtracting the maximum first.
pub fn softmax_into(scores: &[f64], scale: f64, out: &mut [f64]) {
    debug_assert_eq!(scores.len(), out.len());
    let max = scores.iter().map(|s| scale * s).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (scale * s - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

/// `Σ p_i ln(p_i / q_i)`; terms with `p_i = 0` contribute nothing.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}
