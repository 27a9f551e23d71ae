//! Cross-validation, confusion matrices and fat-layer parameter counts.

mod cv;
mod report;

pub use cv::{
    build_embedding, cross_validate, run_cv, run_cv_with, CvConfig, CvRun, EmbeddingSpec,
    FoldContext, FoldOutcome, ModelSpec,
};
pub use report::{
    confusion_svg, confusion_table, write_confusion_csv, write_predictions_csv, write_summary_csv,
};

use ndarray::Array2;

use crate::error::{Error, Result};

#[cfg(test)]
mod tests;

/// Model families whose fat-layer free parameters can be counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamSpec {
    /// Free `N_d × N_h` fat matrices.
    Basic,
    /// One auxiliary layer `N_f → N_h` per fat matrix on a fixed embedding.
    FixedEmbedding { aux_bias: bool },
    /// A shared `N_train → N_f` embedding layer learnt with the model,
    /// followed by one `N_f → N_h` auxiliary layer per fat matrix.
    RawEnd2End,
}

/// Free parameters of the fat layers only. With reconstruction there are
/// two fat matrices (two auxiliary heads) instead of one.
pub fn count_free_params(
    spec: ParamSpec,
    n_d: u64,
    n_train: u64,
    n_f: u64,
    n_h: u64,
    reconstruction: bool,
) -> u64 {
    let heads = if reconstruction { 2 } else { 1 };
    match spec {
        ParamSpec::Basic => heads * n_d * n_h,
        ParamSpec::FixedEmbedding { aux_bias } => {
            heads * (n_f * n_h + if aux_bias { n_h } else { 0 })
        }
        ParamSpec::RawEnd2End => (n_train * n_f + n_f) + heads * (n_f * n_h + n_h),
    }
}

/// `m[true][predicted]` counts.
pub fn confusion(predictions: &[usize], labels: &[usize], n_classes: usize) -> Result<Array2<u64>> {
    if predictions.len() != labels.len() {
        return Err(Error::shape(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut m = Array2::zeros((n_classes, n_classes));
    for (&p, &t) in predictions.iter().zip(labels) {
        if p >= n_classes || t >= n_classes {
            return Err(Error::arg(format!(
                "class index out of range ({t} → {p}, {n_classes} classes)"
            )));
        }
        m[[t, p]] += 1;
    }
    Ok(m)
}

/// Sums the blocks of a class confusion matrix under `region_of`.
pub fn region_confusion(
    class_confusion: &Array2<u64>,
    region_of: &[usize],
    n_regions: usize,
) -> Array2<u64> {
    let mut m = Array2::zeros((n_regions, n_regions));
    for ((t, p), &v) in class_confusion.indexed_iter() {
        m[[region_of[t], region_of[p]]] += v;
    }
    m
}

/// Rows divided by their sums; empty rows stay zero.
pub fn row_normalize(m: &Array2<u64>) -> Array2<f64> {
    let mut out = m.mapv(|v| v as f64);
    for mut row in out.outer_iter_mut() {
        let s = row.sum();
        if s > 0.0 {
            row /= s;
        }
    }
    out
}

/// Off-diagonal mass over total mass.
pub fn confusion_error(m: &Array2<u64>) -> f64 {
    let total: u64 = m.sum();
    if total == 0 {
        return 0.0;
    }
    let diag: u64 = m.diag().sum();
    (total - diag) as f64 / total as f64
}

/// Mean and sample (`n − 1`) standard deviation; the deviation is 0 for a
/// single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Test-set result of one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold: usize,
    /// Dataset rows of the test samples.
    pub test_rows: Vec<usize>,
    pub predictions: Vec<usize>,
    pub n_errors: usize,
    pub error: f64,
    pub fat_params: Option<usize>,
}

/// Aggregate over all folds.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub model: String,
    pub class_names: Vec<String>,
    pub region_names: Vec<String>,
    pub folds: Vec<FoldReport>,
    pub mean_error: f64,
    pub std_error: f64,
    /// Summed over folds, `[true][predicted]`.
    pub class_confusion: Array2<u64>,
    pub region_confusion: Array2<u64>,
    /// Fat-layer free parameters (identical across folds; none for PCA).
    pub fat_params: Option<usize>,
}

impl CvReport {
    /// Builds the aggregate from per-fold results.
    pub fn from_folds(
        model: impl Into<String>,
        folds: Vec<FoldReport>,
        labels: &[usize],
        class_names: Vec<String>,
        region_names: Vec<String>,
        region_of: &[usize],
    ) -> Result<Self> {
        let c = class_names.len();
        let mut class_confusion = Array2::zeros((c, c));
        for f in &folds {
            let truth: Vec<usize> = f.test_rows.iter().map(|&i| labels[i]).collect();
            class_confusion += &confusion(&f.predictions, &truth, c)?;
        }
        let region_confusion = region_confusion(&class_confusion, region_of, region_names.len());
        let errors: Vec<f64> = folds.iter().map(|f| f.error).collect();
        let (mean_error, std_error) = mean_std(&errors);
        let fat_params = folds.first().and_then(|f| f.fat_params);
        Ok(CvReport {
            model: model.into(),
            class_names,
            region_names,
            folds,
            mean_error,
            std_error,
            class_confusion,
            region_confusion,
            fat_params,
        })
    }

    pub fn class_error(&self) -> f64 {
        confusion_error(&self.class_confusion)
    }

    pub fn region_error(&self) -> f64 {
        confusion_error(&self.region_confusion)
    }

    pub fn n_test(&self) -> usize {
        self.folds.iter().map(|f| f.test_rows.len()).sum()
    }
}
