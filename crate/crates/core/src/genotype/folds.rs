//! Stratified k-fold assignment.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GenotypeDataset;
use crate::error::{Error, Result};

/// Per-sample fold index plus the test / validation / train views used by
/// the cross-validation protocol: for test fold `t` the validation fold is
/// `(t + 1) mod k` and the remaining folds train.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldSplit {
    pub fn n_samples(&self) -> usize {
        self.assignment.len()
    }

    pub fn fold(&self, f: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == f)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn test(&self, t: usize) -> Vec<usize> {
        self.fold(t)
    }

    pub fn validation(&self, t: usize) -> Vec<usize> {
        self.fold((t + 1) % self.k)
    }

    pub fn train(&self, t: usize) -> Vec<usize> {
        let v = (t + 1) % self.k;
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != t && self.assignment[i] != v)
            .collect()
    }
}

/// Assigns samples to `k` folds.
///
/// Members of each class with at least `k` samples are shuffled and dealt
/// round-robin, continuing the deal across classes, so every fold gets
/// within one sample of its proportional share of each class and fold sizes
/// differ by at most one. Classes smaller than `k` are pooled, shuffled and
/// dealt last.
pub fn assign_folds(labels: Option<&[usize]>, n: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::arg("need at least 2 folds"));
    }
    if n < k {
        return Err(Error::arg(format!("{n} samples cannot fill {k} folds")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    match labels {
        None => {
            order.extend(0..n);
            order.shuffle(&mut rng);
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(Error::shape(format!(
                    "{} labels for {n} samples",
                    labels.len()
                )));
            }
            let n_classes = labels.iter().max().map_or(0, |m| m + 1);
            let mut members = vec![Vec::new(); n_classes];
            for (i, &c) in labels.iter().enumerate() {
                members[c].push(i);
            }
            let mut pooled = Vec::new();
            for (c, m) in members.iter_mut().enumerate() {
                if m.is_empty() {
                    continue;
                }
                if m.len() < k {
                    log::warn!(
                        "class {c} has {} < {k} samples; assigned unstratified",
                        m.len()
                    );
                    pooled.extend_from_slice(m);
                    continue;
                }
                m.shuffle(&mut rng);
                order.extend_from_slice(m);
            }
            pooled.shuffle(&mut rng);
            order.extend(pooled);
        }
    }
    let mut assignment = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % k;
    }
    Ok(FoldSplit { k, assignment })
}

/// Stratified folds over a dataset's labels (unstratified when unlabeled).
pub fn make_folds(ds: &GenotypeDataset, k: usize, seed: u64) -> Result<FoldSplit> {
    let labels = ds.labels.as_ref().map(|l| l.labels.as_slice());
    assign_folds(labels, ds.n_samples(), k, seed)
}
