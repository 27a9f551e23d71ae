//! The k-fold protocol: for test fold `t`, fold `t + 1` validates and the
//! rest train. Embeddings, input means and PCA axes come from the training
//! rows of each fold only.

use ndarray::{Array2, Axis};

use super::{CvReport, FoldReport};
use crate::baselines::{Head, PcaClassifier};
use crate::diet::{
    input_scale, train, DietNetwork, EmbeddingSource, FoldData, History, TrainConfig,
};
use crate::embedding::{
    embed_class_histogram, embed_one_hot, embed_random_projection, embed_snp2vec,
    split_fingerprint, train_dae, DaeConfig, EmbeddingKind,
};
use crate::error::{Error, Result};
use crate::genotype::{make_folds, FoldSplit, GenotypeDataset};
use crate::nn::{argmax_rows, Activation, Checkpoint, Parametrized};
use crate::par;

/// How each fold's embedding is computed.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpec {
    pub kind: EmbeddingKind,
    /// Random-projection width.
    pub n_f: usize,
    /// Random-projection nonlinearity.
    pub activation: Activation,
    /// SNP2Vec autoencoder; its seed is replaced by the fold seed.
    pub dae: DaeConfig,
    pub alpha: f64,
}

impl EmbeddingSpec {
    pub fn new(kind: EmbeddingKind) -> Self {
        EmbeddingSpec {
            kind,
            n_f: 100,
            activation: Activation::Identity,
            dae: DaeConfig::default(),
            alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Basic,
    Diet(EmbeddingSpec),
    Pca { k: usize, head: Head },
}

impl ModelSpec {
    /// Short descriptor used in reports.
    pub fn describe(&self, train: &TrainConfig) -> String {
        let recon = if train.reconstruction() {
            " + recon"
        } else {
            ""
        };
        match self {
            ModelSpec::Basic => format!("basic{recon}"),
            ModelSpec::Diet(e) => format!("diet[{}]{recon}", e.kind.name()),
            ModelSpec::Pca { k, head } => format!("pca({k}) + {}", head.describe()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    /// Seeds the fold assignment; fold `t` trains with `seed + t`.
    pub seed: u64,
    pub train: TrainConfig,
    /// Folds run concurrently on this many threads (0: the current pool).
    pub jobs: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            seed: 0,
            train: TrainConfig::default(),
            jobs: 0,
        }
    }
}

/// Everything a fold job may look at.
pub struct FoldContext<'a> {
    pub fold: usize,
    pub dataset: &'a GenotypeDataset,
    pub train_rows: Vec<usize>,
    pub valid_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Scaled with the training means.
    pub data: FoldData,
    pub x_test: Array2<f64>,
    pub y_test: Vec<usize>,
    /// Fingerprint of the training split.
    pub fingerprint: String,
    pub n_classes: usize,
    pub seed: u64,
}

/// What a fold job returns.
#[derive(Debug, Clone, Default)]
pub struct FoldOutcome {
    /// One class per test row, in `test_rows` order.
    pub predictions: Vec<usize>,
    pub fat_params: Option<usize>,
    pub history: Option<History>,
    pub checkpoint: Option<Checkpoint>,
}

#[derive(Debug, Clone)]
pub struct CvRun {
    pub report: CvReport,
    /// Per fold, when the job trained something.
    pub histories: Vec<Option<History>>,
    pub checkpoints: Vec<Option<Checkpoint>>,
}

fn context<'a>(
    ds: &'a GenotypeDataset,
    split: &FoldSplit,
    t: usize,
    seed: u64,
) -> Result<FoldContext<'a>> {
    let labels = ds.labels()?;
    let train_rows = split.train(t);
    let valid_rows = split.validation(t);
    let test_rows = split.test(t);
    if train_rows.is_empty() {
        return Err(Error::arg(format!("fold {t} has no training samples")));
    }
    let (x, _) = input_scale(ds.genotypes.view(), &train_rows);
    let y = |rows: &[usize]| rows.iter().map(|&i| labels.labels[i]).collect::<Vec<_>>();
    Ok(FoldContext {
        fold: t,
        dataset: ds,
        data: FoldData {
            x_train: x.select(Axis(0), &train_rows),
            y_train: y(&train_rows),
            x_valid: x.select(Axis(0), &valid_rows),
            y_valid: y(&valid_rows),
        },
        x_test: x.select(Axis(0), &test_rows),
        y_test: y(&test_rows),
        fingerprint: split_fingerprint(&ds.sample_ids, &train_rows),
        train_rows,
        valid_rows,
        test_rows,
        n_classes: labels.n_classes(),
        seed: seed.wrapping_add(t as u64),
    })
}

/// Runs `job` on every fold of `split` and aggregates the test predictions.
///
/// A failing fold fails the run; the error carries the folds that finished.
pub fn cross_validate<F>(
    ds: &GenotypeDataset,
    split: &FoldSplit,
    model: &str,
    cfg: &CvConfig,
    job: F,
) -> Result<CvRun>
where
    F: Fn(&FoldContext<'_>) -> Result<FoldOutcome> + Sync,
{
    let labels = ds.labels()?;
    if split.n_samples() != ds.n_samples() {
        return Err(Error::shape(
            "fold assignment does not cover the dataset".to_string(),
        ));
    }
    let run_fold = |t: usize| -> Result<(FoldReport, FoldOutcome)> {
        let ctx = context(ds, split, t, cfg.seed)?;
        let out = job(&ctx)?;
        if out.predictions.len() != ctx.test_rows.len() {
            return Err(Error::shape(format!(
                "{} predictions for {} test samples",
                out.predictions.len(),
                ctx.test_rows.len()
            )));
        }
        let n_errors = out
            .predictions
            .iter()
            .zip(&ctx.y_test)
            .filter(|(p, y)| p != y)
            .count();
        let n = ctx.test_rows.len();
        let report = FoldReport {
            fold: t,
            test_rows: ctx.test_rows.clone(),
            predictions: out.predictions.clone(),
            n_errors,
            error: if n == 0 {
                0.0
            } else {
                n_errors as f64 / n as f64
            },
            fat_params: out.fat_params,
        };
        Ok((report, out))
    };
    let results = if cfg.jobs == 0 {
        par::map_indices(split.k, run_fold)
    } else {
        par::with_threads(cfg.jobs, || par::map_indices(split.k, run_fold))
    };

    let mut failure = None;
    let mut folds = Vec::new();
    let mut histories = Vec::new();
    let mut checkpoints = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok((report, out)) => {
                folds.push(report);
                histories.push(out.history);
                checkpoints.push(out.checkpoint);
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some((t, e));
                }
            }
        }
    }
    if let Some((fold, cause)) = failure {
        return Err(Error::FoldFailed {
            fold,
            cause: Box::new(cause),
            completed: folds,
        });
    }
    let report = CvReport::from_folds(
        model,
        folds,
        &labels.labels,
        labels.classes.clone(),
        labels.regions.clone(),
        &labels.region_of,
    )?;
    Ok(CvRun {
        report,
        histories,
        checkpoints,
    })
}

/// Embedding of one fold, computed from its training rows.
pub fn build_embedding(
    ctx: &FoldContext<'_>,
    spec: &EmbeddingSpec,
    train_cfg: &TrainConfig,
) -> Result<EmbeddingSource> {
    let x = ctx.data.x_train.view();
    let n_d = x.ncols();
    let fixed = match spec.kind {
        EmbeddingKind::RandomProjection => {
            embed_random_projection(x, spec.n_f, ctx.seed, spec.activation)?
        }
        EmbeddingKind::ClassHistogram => {
            let g = ctx.dataset.genotypes.select(Axis(0), &ctx.train_rows);
            embed_class_histogram(g.view(), &ctx.data.y_train, ctx.n_classes)?
        }
        EmbeddingKind::Snp2Vec => {
            let cfg = DaeConfig {
                seed: ctx.seed,
                ..spec.dae.clone()
            };
            let (dae, _) = train_dae(x, &cfg)?;
            embed_snp2vec(&dae, n_d, spec.alpha)?
        }
        EmbeddingKind::OneHot => embed_one_hot(n_d),
        EmbeddingKind::Learnt => {
            return Ok(EmbeddingSource::learnt(
                x,
                train_cfg.aux_hidden,
                train_cfg.activation,
                ctx.seed,
                ctx.fingerprint.clone(),
            ))
        }
    };
    Ok(EmbeddingSource::Fixed(
        fixed.with_fingerprint(ctx.fingerprint.clone()),
    ))
}

/// Stratified folds of `ds`, then `spec` trained and tested on each.
pub fn run_cv(ds: &GenotypeDataset, spec: &ModelSpec, cfg: &CvConfig) -> Result<CvRun> {
    run_cv_with(ds, spec, cfg, &build_embedding)
}

/// [`run_cv`] with a custom embedding builder. Embeddings whose fingerprint
/// does not match the fold's training split are refused.
pub fn run_cv_with<E>(
    ds: &GenotypeDataset,
    spec: &ModelSpec,
    cfg: &CvConfig,
    embed: &E,
) -> Result<CvRun>
where
    E: Fn(&FoldContext<'_>, &EmbeddingSpec, &TrainConfig) -> Result<EmbeddingSource> + Sync,
{
    cfg.train.validate()?;
    let split = make_folds(ds, cfg.folds, cfg.seed)?;
    let name = spec.describe(&cfg.train);
    cross_validate(ds, &split, &name, cfg, |ctx| {
        let tcfg = TrainConfig {
            seed: ctx.seed,
            ..cfg.train.clone()
        };
        match spec {
            ModelSpec::Basic => {
                let net = DietNetwork::basic(ctx.dataset.n_snps(), ctx.n_classes, &tcfg)?;
                fit_network(ctx, net, &tcfg)
            }
            ModelSpec::Diet(e) => {
                let source = embed(ctx, e, &tcfg)?;
                if source.fingerprint() != ctx.fingerprint {
                    return Err(Error::Provenance {
                        expected: ctx.fingerprint.clone(),
                        found: source.fingerprint().to_string(),
                    });
                }
                let net = DietNetwork::diet(source, ctx.n_classes, &tcfg)?;
                fit_network(ctx, net, &tcfg)
            }
            ModelSpec::Pca { k, head } => {
                let (clf, history) = PcaClassifier::fit(&ctx.data, *k, ctx.n_classes, head, &tcfg)?;
                let logits = clf.predict(ctx.x_test.view())?;
                let mut head_net = clf.head.clone();
                let mut blocks = vec![
                    (
                        "pca.mean".to_string(),
                        clf.pca.mean.clone().insert_axis(Axis(0)),
                    ),
                    ("pca.axes".to_string(), clf.pca.axes.clone()),
                ];
                blocks.extend(
                    head_net
                        .params_mut()
                        .into_iter()
                        .map(|p| (p.name, p.value.to_owned())),
                );
                Ok(FoldOutcome {
                    predictions: argmax_rows(logits.view()),
                    fat_params: None,
                    history: Some(history),
                    checkpoint: Some(Checkpoint {
                        metadata: format!(
                            "variant=pca\nk={k}\nhead={}\nfingerprint={}",
                            head.describe(),
                            ctx.fingerprint
                        ),
                        blocks,
                    }),
                })
            }
        }
    })
}

fn fit_network(ctx: &FoldContext<'_>, net: DietNetwork, cfg: &TrainConfig) -> Result<FoldOutcome> {
    let fat_params = net.fat_free_params();
    let (net, history) = train(net, &ctx.data, cfg)?;
    let probs = net.predict(ctx.x_test.view())?;
    Ok(FoldOutcome {
        predictions: argmax_rows(probs.view()),
        fat_params: Some(fat_params),
        history: Some(history),
        checkpoint: Some(net.checkpoint()),
    })
}
