use std::sync::OnceLock;

use regex::Regex;

fn answer_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"(?i)answer\s*:\s*(?:option\s*)?(\d+)\s*[,;]?\s*confidence\s*:\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:e[-+]?\d+)?)")
            .expect("answer pattern compiles")
    })
}

/// Extracts `(option, confidence)` from a response ending in
/// `ANSWER: <index> CONFIDENCE: <0..1>`.
///
/// The index is 1-based in the text and returned 0-based. The last match
/// wins. Confidence is clamped to `[0, 1]`; an index outside `1..=k` counts
/// as unparseable.
pub fn parse_answer(text: &str, k: usize) -> Option<(usize, f64)> {
    let caps = answer_pattern().captures_iter(text).last()?;
    let index: usize = caps[1].parse().ok()?;
    let confidence: f64 = caps[2].parse().ok()?;
    if index == 0 || index > k || !confidence.is_finite() {
        return None;
    }
    Some((index - 1, confidence.clamp(0.0, 1.0)))
}

/// Canonical answer line; `parse_answer` recovers the confidence bit-exactly.
pub fn format_answer(option: usize, confidence: f64) -> String {
    format!("ANSWER: {} CONFIDENCE: {}", option + 1, confidence)
}
