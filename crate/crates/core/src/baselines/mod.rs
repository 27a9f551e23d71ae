//! PCA reduction of the genotype matrix followed by a softmax head.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diet::{train, FoldData, History, TrainConfig};
use crate::error::{Error, Result};
use crate::nn::linalg::matmul;
use crate::nn::{Activation, Mlp};


/// Eigenvalues below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// Top principal axes of a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Training column means (`N_d`).
    pub mean: Array1<f64>,
    /// `N_d × k`, orthonormal columns.
    pub axes: Array2<f64>,
    /// Sample-covariance eigenvalues, nonincreasing.
    pub eigenvalues: Array1<f64>,
    /// Number of axes backed by a nonzero eigenvalue.
    pub rank: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.axes.ncols()
    }
}

/// Which symmetric matrix gets diagonalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaRoute {
    /// `N × N` Gram matrix of the centred rows.
    Gram,
    /// `N_d × N_d` covariance.
    Covariance,
}

/// PCA on the centred (not standardised) columns of `x`, taking the cheaper
/// route.
pub fn fit_pca(x: ArrayView2<'_, f64>, k: usize) -> Result<PcaModel> {
    let route = if x.nrows() <= x.ncols() {
        PcaRoute::Gram
    } else {
        PcaRoute::Covariance
    };
    fit_pca_with(x, k, route)
}

pub fn fit_pca_with(x: ArrayView2<'_, f64>, k: usize, route: PcaRoute) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::arg("PCA needs at least two samples"));
    }
    if k > n.min(d) {
        return Err(Error::arg(format!(
            "{k} components requested from a {n} × {d} matrix"
        )));
    }
    let mean = x.mean_axis(Axis(0)).expect("n ≥ 2");
    let xc = &x - &mean;
    let denom = (n - 1) as f64;

    let (values, vectors) = match route {
        PcaRoute::Gram => {
            let g = matmul(xc.view(), xc.t()) / denom;
            let (vals, u) = sorted_eigen(&g);
            // v = Xcᵀu / √((n-1)λ)
            let v = matmul(xc.t(), u.view());
            let cols: Vec<Array1<f64>> = (0..vals.len())
                .map(|i| {
                    let l = vals[i].max(0.0);
                    let c = v.column(i);
                    if l > 0.0 {
                        &c / (denom * l).sqrt()
                    } else {
                        Array1::zeros(d)
                    }
                })
                .collect();
            (vals, cols)
        }
        PcaRoute::Covariance => {
            let c = matmul(xc.t(), xc.view()) / denom;
            let (vals, v) = sorted_eigen(&c);
            let cols = (0..vals.len()).map(|i| v.column(i).to_owned()).collect();
            (vals, cols)
        }
    };

    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    let rank = values
        .iter()
        .take_while(|&&l| l > top * RANK_TOL && l > 0.0)
        .count()
        .min(k);
    if rank < k {
        log::warn!("PCA: only {rank} of {k} components have nonzero variance; padding with zero-variance axes");
    }

    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(k);
    for v in vectors.into_iter().take(rank) {
        push_orthonormal(&mut basis, v);
    }
    let mut e = 0;
    while basis.len() < k {
        let mut unit = Array1::zeros(d);
        unit[e] = 1.0;
        push_orthonormal(&mut basis, unit);
        e += 1;
    }
    let mut axes = Array2::zeros((d, k));
    for (i, mut v) in basis.into_iter().enumerate() {
        fix_sign(&mut v);
        axes.column_mut(i).assign(&v);
    }
    let eigenvalues = Array1::from_shape_fn(k, |i| if i < rank { values[i] } else { 0.0 });
    Ok(PcaModel {
        mean,
        axes,
        eigenvalues,
        rank,
    })
}

/// Eigenpairs of a symmetric matrix, eigenvalues nonincreasing.
fn sorted_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[[i, j]] + m[[j, i]]));
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Modified Gram-Schmidt against `basis`; keeps `v` only if enough of it
/// survives.
fn push_orthonormal(basis: &mut Vec<Array1<f64>>, mut v: Array1<f64>) {
    let before = v.dot(&v).sqrt();
    for _ in 0..2 {
        for b in basis.iter() {
            let p = b.dot(&v);
            v.scaled_add(-p, b);
        }
    }
    let norm = v.dot(&v).sqrt();
    if norm > 1e-6 * before.max(1e-300) && norm > 0.0 {
        basis.push(v / norm);
    }
}

/// Makes the entry of largest magnitude positive (first one on ties).
fn fix_sign(v: &mut Array1<f64>) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

/// `(x − mean) · axes`.
pub fn project(pca: &PcaModel, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.ncols() != pca.mean.len() {
        return Err(Error::shape(format!(
            "{} SNPs but the PCA was fitted on {}",
            x.ncols(),
            pca.mean.len()
        )));
    }
    if pca.n_components() == 0 {
        return Ok(Array2::zeros((x.nrows(), 0)));
    }
    let xc = &x - &pca.mean;
    Ok(matmul(xc.view(), pca.axes.view()))
}

/// Classification head on top of the PCA scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Head {
    /// Softmax regression.
    Linear,
    /// Hidden layer sizes of an MLP.
    Mlp(Vec<usize>),
}

impl Head {
    pub fn describe(&self) -> String {
        match self {
            Head::Linear => "linear".into(),
            Head::Mlp(sizes) => {
                let s: Vec<String> = sizes.iter().map(usize::to_string).collect();
                format!("mlp({})", s.join(","))
            }
        }
    }
}

/// `k → sizes… → n_classes` with identity logits; hidden layers use the
/// trunk activation and dropout of `cfg`.
pub fn build_head(k: usize, head: &Head, n_classes: usize, cfg: &TrainConfig) -> Mlp {
    let mut sizes = vec![k];
    if let Head::Mlp(h) = head {
        sizes.extend(h);
    }
    sizes.push(n_classes);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = Mlp::new(&sizes, cfg.activation, Activation::Identity, &mut rng);
    let n = m.layers.len();
    for l in &mut m.layers[..n - 1] {
        l.dropout = cfg.dropout;
    }
    m
}

/// Trains a head on precomputed scores with the same protocol as the Diet
/// model (RMSProp, early stopping on the validation split).
pub fn train_pca_classifier(
    scores: &FoldData,
    n_classes: usize,
    head: &Head,
    cfg: &TrainConfig,
) -> Result<(Mlp, History)> {
    if let Head::Mlp(h) = head {
        if h.contains(&0) {
            return Err(Error::arg("MLP head sizes must be positive"));
        }
    }
    let cfg = TrainConfig {
        gamma: 0.0,
        ..cfg.clone()
    };
    let model = build_head(scores.x_train.ncols(), head, n_classes, &cfg);
    train(model, scores, &cfg)
}

/// PCA fitted on the training rows plus a trained head.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaClassifier {
    pub pca: PcaModel,
    pub head: Mlp,
}

impl PcaClassifier {
    /// Fits the PCA on `data.x_train` and trains `head` on its scores.
    pub fn fit(
        data: &FoldData,
        k: usize,
        n_classes: usize,
        head: &Head,
        cfg: &TrainConfig,
    ) -> Result<(Self, History)> {
        let pca = fit_pca(data.x_train.view(), k)?;
        let scores = FoldData {
            x_train: project(&pca, data.x_train.view())?,
            y_train: data.y_train.clone(),
            x_valid: project(&pca, data.x_valid.view())?,
            y_valid: data.y_valid.clone(),
        };
        let (head, history) = train_pca_classifier(&scores, n_classes, head, cfg)?;
        Ok((PcaClassifier { pca, head }, history))
    }

    /// Class logits.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.head.predict(project(&self.pca, x)?.view())
    }
}

/// `snp_id,mean,eigenvalue-ordered pc1…` rows, one per SNP.
pub fn write_axes_csv<W: Write>(pca: &PcaModel, snp_ids: &[String], mut w: W) -> Result<()> {
    if snp_ids.len() != pca.mean.len() {
        return Err(Error::shape("one SNP id per axis row".to_string()));
    }
    write!(w, "snp_id,mean")?;
    for i in 1..=pca.n_components() {
        write!(w, ",pc{i}")?;
    }
    writeln!(w)?;
    for (j, id) in snp_ids.iter().enumerate() {
        write!(w, "{id},{:e}", pca.mean[j])?;
        for v in pca.axes.row(j) {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    write!(w, "eigenvalue,")?;
    for v in &pca.eigenvalues {
        write!(w, ",{v:e}")?;
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_scores_csv<W: Write>(
    scores: ArrayView2<'_, f64>,
    sample_ids: &[String],
    mut w: W,
) -> Result<()> {
    if sample_ids.len() != scores.nrows() {
        return Err(Error::shape("one sample id per score row".to_string()));
    }
    write!(w, "sample_id")?;
    for i in 1..=scores.ncols() {
        write!(w, ",pc{i}")?;
    }
    writeln!(w)?;
    for (id, row) in sample_ids.iter().zip(scores.outer_iter()) {
        write!(w, "{id}")?;
        for v in row {
            write!(w, ",{v:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
