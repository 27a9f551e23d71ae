//! Per-SNP feature embeddings computed from the transposed training matrix.

mod dae;
mod io;

pub use dae::{corrupt, embed_snp2vec, train_dae, Dae, DaeConfig};
pub use io::{read_embedding, write_embedding, write_embedding_csv};

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::genotype::MISSING;
use crate::nn::{linalg::matmul, Activation};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    RandomProjection,
    ClassHistogram,
    Snp2Vec,
    OneHot,
    /// Learnt jointly with the classifier from the raw training columns.
    Learnt,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 5] = [
        EmbeddingKind::RandomProjection,
        EmbeddingKind::ClassHistogram,
        EmbeddingKind::Snp2Vec,
        EmbeddingKind::OneHot,
        EmbeddingKind::Learnt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingKind::RandomProjection => "random_projection",
            EmbeddingKind::ClassHistogram => "class_histogram",
            EmbeddingKind::Snp2Vec => "snp2vec",
            EmbeddingKind::OneHot => "one_hot",
            EmbeddingKind::Learnt => "learnt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Where an embedding came from: the fingerprint of the sample split it was
/// computed on, plus the seed and hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub fingerprint: String,
    pub seed: u64,
    pub params: String,
}

/// `N_d × N_f` matrix whose row `j` embeds SNP `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEmbedding {
    pub matrix: Array2<f64>,
    pub kind: EmbeddingKind,
    pub provenance: Provenance,
}

impl FeatureEmbedding {
    pub fn new(matrix: Array2<f64>, kind: EmbeddingKind, provenance: Provenance) -> Result<Self> {
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { layer: 0 });
        }
        Ok(FeatureEmbedding {
            matrix,
            kind,
            provenance,
        })
    }

    pub fn n_snps(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.provenance.fingerprint = fingerprint.into();
        self
    }
}

/// Fingerprint of a set of samples, independent of their order.
pub fn split_fingerprint(sample_ids: &[String], rows: &[usize]) -> String {
    let mut ids: Vec<&str> = rows.iter().map(|&i| sample_ids[i].as_str()).collect();
    ids.sort_unstable();
    crate::hash::fingerprint(ids)
}

/// `f(Xᵀ R)` with `R` an `N_train × n_f` Gaussian matrix of standard
/// deviation `1/√N_train`. `x_train` holds scaled training genotypes
/// (samples × SNPs).
pub fn embed_random_projection(
    x_train: ArrayView2<'_, f64>,
    n_f: usize,
    seed: u64,
    activation: Activation,
) -> Result<FeatureEmbedding> {
    if n_f == 0 {
        return Err(Error::arg("embedding width must be at least 1"));
    }
    let n = x_train.nrows();
    let sd = 1.0 / (n.max(1) as f64).sqrt();
    let normal = Normal::new(0.0, sd).map_err(|e| Error::arg(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = Array2::from_shape_fn((n, n_f), |_| normal.sample(&mut rng));
    let mut e = matmul(x_train.t(), r.view());
    activation.apply(&mut e);
    FeatureEmbedding::new(
        e,
        EmbeddingKind::RandomProjection,
        Provenance {
            fingerprint: String::new(),
            seed,
            params: format!("n_f={n_f};activation={}", activation.name()),
        },
    )
}

/// Per-class proportions of genotypes 0, 1 and 2 for each SNP: row `j` is
/// `[p₀(c=0), p₁(c=0), p₂(c=0), p₀(c=1), …]`, width `3·n_classes`.
///
/// Missing calls are imputed with the SNP's rounded mean over the supplied
/// rows. A class with no samples gets the uniform triplet.
pub fn embed_class_histogram(
    genotypes: ArrayView2<'_, u8>,
    labels: &[usize],
    n_classes: usize,
) -> Result<FeatureEmbedding> {
    let (n, d) = genotypes.dim();
    if labels.len() != n {
        return Err(Error::shape(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::arg(format!("label {bad} outside [0, {n_classes})")));
    }
    let mut class_size = vec![0usize; n_classes];
    for &l in labels {
        class_size[l] += 1;
    }
    let empty = class_size.iter().filter(|&&c| c == 0).count();
    if empty > 0 {
        log::warn!("{empty} classes have no samples; their histogram triplets are uniform");
    }

    let rows = par::map_indices(d, |j| {
        let col = genotypes.column(j);
        let (sum, obs) = col
            .iter()
            .filter(|&&g| g != MISSING)
            .fold((0u64, 0u64), |(s, o), &g| (s + g as u64, o + 1));
        let fill = if obs == 0 {
            0
        } else {
            (sum as f64 / obs as f64).round() as usize
        };
        let mut counts = vec![0usize; 3 * n_classes];
        for (&g, &c) in col.iter().zip(labels) {
            let g = if g == MISSING { fill } else { g as usize };
            counts[3 * c + g] += 1;
        }
        counts
            .iter()
            .enumerate()
            .map(|(k, &cnt)| {
                let size = class_size[k / 3];
                if size == 0 {
                    1.0 / 3.0
                } else {
                    cnt as f64 / size as f64
                }
            })
            .collect::<Vec<f64>>()
    });
    let matrix = Array2::from_shape_vec((d, 3 * n_classes), rows.into_iter().flatten().collect())
        .map_err(|e| Error::shape(e.to_string()))?;
    FeatureEmbedding::new(
        matrix,
        EmbeddingKind::ClassHistogram,
        Provenance {
            fingerprint: String::new(),
            seed: 0,
            params: format!("classes={n_classes}"),
        },
    )
}

/// Identity embedding.
pub fn embed_one_hot(n_d: usize) -> FeatureEmbedding {
    FeatureEmbedding {
        matrix: Array2::eye(n_d),
        kind: EmbeddingKind::OneHot,
        provenance: Provenance::default(),
    }
}

#[cfg(test)]
mod tests;
