use rand::seq::index::sample;
use rand::Rng;

use crate::types::HypothesisSet;

/// Per-attribute preference levels: strong/weak dislike, none, weak/strong like.
pub const PREFERENCE_LEVELS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// Every vector in `PREFERENCE_LEVELS^d`, in lexicographic order.
pub fn preference_grid(d: usize) -> Vec<Vec<f64>> {
    assert!(d >= 1, "grid needs at least one attribute");
    let levels = PREFERENCE_LEVELS.len();
    let m = levels.pow(d as u32);
    (0..m)
        .map(|mut code| {
            let mut w = vec![0.0; d];
            for slot in w.iter_mut().rev() {
                *slot = PREFERENCE_LEVELS[code % levels];
                code /= levels;
            }
            w
        })
        .collect()
}

/// Draws one grid vector uniformly, excluding the all-zero "no preference"
/// vector (it has no preferred option to evaluate against).
pub fn sample_preference<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..d)
            .map(|_| PREFERENCE_LEVELS[rng.random_range(0..PREFERENCE_LEVELS.len())])
            .collect();
        if w.iter().any(|&v| v != 0.0) {
            return w;
        }
    }
}

/// How a hypothesis set relates to the simulated user's true vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthPolicy {
    Retain,
    Exclude,
}

/// Builds the grid hypothesis set for dimension `d`.
///
/// With `truth`, the true vector is kept (`Retain`) or removed (`Exclude`).
/// With `max_size`, the grid is subsampled uniformly without replacement to at
/// most that many entries, again honoring the truth policy; grid order is
/// preserved.
pub fn build_hypothesis_set<R: Rng + ?Sized>(
    d: usize,
    max_size: Option<usize>,
    truth: Option<(&[f64], TruthPolicy)>,
    rng: &mut R,
) -> HypothesisSet {
    let mut grid = preference_grid(d);
    let mut truth_pos = truth.and_then(|(w, _)| grid.iter().position(|g| g.as_slice() == w));
    if let (Some(pos), Some((_, TruthPolicy::Exclude))) = (truth_pos, truth) {
        grid.remove(pos);
        truth_pos = None;
    }
    if let Some(max) = max_size.filter(|&max| max >= 1 && max < grid.len()) {
        let mut picked = sample(rng, grid.len(), max).into_vec();
        if let Some(pos) = truth_pos {
            if !picked.contains(&pos) {
                let slot = rng.random_range(0..picked.len());
                picked[slot] = pos;
            }
        }
        picked.sort_unstable();
        grid = picked.into_iter().map(|i| grid[i].clone()).collect();
    }
    HypothesisSet::new(grid).expect("grid vectors are distinct")
}
