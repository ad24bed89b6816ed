//! Temporal train/test split and training-set undersampling.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ComposerError, FeatureRow};
use crate::corpus::Timestamp;

pub const DEFAULT_SPLIT_RATIO: f64 = 0.8;
pub const MIN_BUGS_FOR_SPLIT: usize = 5;

/// Orders bugs by resolution date (then id) and puts the first `⌈ratio·n⌉` in training.
pub fn split_train_test(
    bugs: &[(String, Timestamp)],
    ratio: f64,
) -> Result<(Vec<String>, Vec<String>), ComposerError> {
    if bugs.len() < MIN_BUGS_FOR_SPLIT {
        return Err(ComposerError::TooFewBugs { found: bugs.len(), required: MIN_BUGS_FOR_SPLIT });
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(ComposerError::InvalidSpec(format!("split ratio must lie in [0,1], got {ratio}")));
    }
    let mut sorted: Vec<&(String, Timestamp)> = bugs.iter().collect();
    sorted.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    // ratio in parts per million keeps the ceiling exact for decimal ratios like 0.8
    let ppm = (ratio * 1e6).round() as u64;
    let n_train = ((sorted.len() as u64 * ppm).div_ceil(1_000_000)) as usize;
    let (train, test) = sorted.split_at(n_train);
    Ok((train.iter().map(|b| b.0.clone()).collect(), test.iter().map(|b| b.0.clone()).collect()))
}

/// Keeps every positive row and a seeded uniform sample of as many negatives.
/// Row order is preserved.
pub fn undersample(rows: &[FeatureRow], seed: u64) -> Result<Vec<FeatureRow>, ComposerError> {
    let positives = rows.iter().filter(|r| r.label).count();
    let negatives: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].label).collect();
    if positives == 0 || negatives.is_empty() {
        return Err(ComposerError::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; rows.len()];
    for i in 0..rows.len() {
        keep[i] = rows[i].label;
    }
    for pick in sample(&mut rng, negatives.len(), positives.min(negatives.len())) {
        keep[negatives[pick]] = true;
    }
    Ok(rows.iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r.clone()).collect())
}
