use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineError, Result};

fn class_indices(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        out[usize::from(l == 1)].push(i);
    }
    out
}

/// Row indices of a class-balanced subsample: every minority row plus an
/// equal number of majority rows drawn without replacement, shuffled.
pub fn undersample_indices(labels: &[u8], seed: u64) -> Result<Vec<usize>> {
    let [neg, pos] = class_indices(labels);
    if neg.is_empty() || pos.is_empty() {
        return Err(PipelineError::SingleClass);
    }
    let (minority, majority) = if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, majority.len(), minority.len());
    let mut out = minority;
    out.extend(picked.iter().map(|i| majority[i]));
    out.shuffle(&mut rng);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    /// Hex SHA-256 over both index lists; identical partitions share it.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for i in &self.train {
            h.update((*i as u64).to_le_bytes());
        }
        h.update(u64::MAX.to_le_bytes());
        for i in &self.test {
            h.update((*i as u64).to_le_bytes());
        }
        format!("{:x}", h.finalize())
    }
}

/// Stratified split: each class is shuffled and `floor(count * ratio)` of
/// it (at least one, at most count - 1) goes to train.
pub fn train_test_split(labels: &[u8], ratio: f64, seed: u64) -> Result<SplitIndices> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(PipelineError::BadRatio(ratio));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut idx) in class_indices(labels).into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(PipelineError::ClassTooSmall { class: class as u8, count: idx.len() });
        }
        idx.shuffle(&mut rng);
        let n_train = ((idx.len() as f64 * ratio).floor() as usize).clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train.extend(idx);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(SplitIndices { train, test })
}
