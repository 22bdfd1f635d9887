//! Named fixtures and a seeded generator of small two-compatible weighted
//! split systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::int;
use crate::split::{is_two_compatible, is_weakly_compatible, Split, WeightedSplitSystem};

pub const DEFAULT_SEED: u64 = 20_240_917;

fn numbered(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn build(n: usize, splits: &[(&[usize], i64)]) -> WeightedSplitSystem {
    let entries = splits
        .iter()
        .map(|(side, w)| {
            let side: Vec<usize> = side.iter().map(|i| i - 1).collect();
            (Split::from_indices(&side, n).expect("fixture split"), int(*w))
        })
        .collect();
    WeightedSplitSystem::new(numbered(n), entries).expect("fixture system")
}

/// `{1,2}|{3,4}` and `{1,4}|{2,3}` with unit weights: the unit 4-cycle.
pub fn square() -> WeightedSplitSystem {
    build(4, &[(&[1, 2], 1), (&[1, 4], 1)])
}

/// Four unit pendant splits and `{1,2}|{3,4}` of weight 2.
pub fn tree() -> WeightedSplitSystem {
    build(4, &[(&[1], 1), (&[2], 1), (&[3], 1), (&[4], 1), (&[1, 2], 2)])
}

/// Three pairwise incompatible unit splits on six points; the Buneman
/// complex is a 3-cube.
pub fn three_cube() -> WeightedSplitSystem {
    build(6, &[(&[1, 2, 3], 1), (&[2, 3, 4], 1), (&[3, 4, 5], 1)])
}

#[derive(Clone, Debug)]
pub struct CorpusConfig {
    pub count: usize,
    pub seed: u64,
    pub min_points: usize,
    pub max_points: usize,
    pub max_splits: usize,
    pub max_weight: i64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { count: 200, seed: DEFAULT_SEED, min_points: 3, max_points: 6, max_splits: 7, max_weight: 4 }
    }
}

/// `cfg.count` distinct two-compatible systems in which every pair of
/// points is separated by some split. Deterministic in `cfg.seed`.
pub fn random_two_compatible(cfg: &CorpusConfig) -> Vec<WeightedSplitSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out: Vec<WeightedSplitSystem> = Vec::with_capacity(cfg.count);
    while out.len() < cfg.count {
        let n = rng.gen_range(cfg.min_points..=cfg.max_points);
        let k = rng.gen_range(1..=cfg.max_splits);
        let mut entries: Vec<(Split, _)> = Vec::new();
        for _ in 0..k {
            // Side A holds point 0; draw the rest of it.
            let side = 1 | (rng.gen_range(0..(1u64 << (n - 1))) << 1);
            let Ok(split) = Split::new(side, n) else { continue };
            if entries.iter().any(|(s, _)| *s == split) {
                continue;
            }
            entries.push((split, int(rng.gen_range(1..=cfg.max_weight))));
        }
        let separated = (0..n).all(|x| ((x + 1)..n).all(|y| entries.iter().any(|(s, _)| s.separates(x, y))));
        if !separated {
            continue;
        }
        let Ok(system) = WeightedSplitSystem::new(numbered(n), entries) else { continue };
        if !is_two_compatible(&system) || !is_weakly_compatible(&system) || out.contains(&system) {
            continue;
        }
        out.push(system);
    }
    out
}
