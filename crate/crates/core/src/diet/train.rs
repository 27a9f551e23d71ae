//! Hyperparameters, input scaling and the minibatch training loop.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DietNetwork;
use crate::error::{Error, Result};
use crate::genotype::MISSING;
use crate::nn::{
    misclassification, softmax_xent, Activation, Mlp, Mode, Parametrized, RegularizerConfig,
    RmsProp,
};

/// A softmax classifier the training loop can drive.
pub trait Classifier: Parametrized + Clone {
    /// Train-mode objective on a minibatch and its gradients in
    /// [`Parametrized`] order.
    fn batch_loss_and_grads(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<Array2<f64>>)>;

    /// Eval-mode objective and misclassification over a whole set.
    fn evaluate(&self, x: ArrayView2<'_, f64>, y: &[usize], gamma: f64) -> Result<(f64, f64)>;
}

impl Classifier for DietNetwork {
    fn batch_loss_and_grads(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<Array2<f64>>)> {
        let (loss, grads) = self.loss_and_grads(x, y, gamma, Mode::Train, rng)?;
        Ok((loss.total, grads))
    }

    fn evaluate(&self, x: ArrayView2<'_, f64>, y: &[usize], gamma: f64) -> Result<(f64, f64)> {
        evaluate(self, x, y, gamma)
    }
}

/// An MLP whose last layer emits logits; `gamma` is ignored.
impl Classifier for Mlp {
    fn batch_loss_and_grads(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        _gamma: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<(f64, Vec<Array2<f64>>)> {
        let trace = self.forward(x, Mode::Train, rng)?;
        let (loss, dlogits) = softmax_xent(trace.output().view(), y);
        let (grads, _) = self.backward(&trace, &dlogits);
        Ok((loss, Mlp::flatten_grads(grads)))
    }

    fn evaluate(&self, x: ArrayView2<'_, f64>, y: &[usize], _gamma: f64) -> Result<(f64, f64)> {
        if y.is_empty() {
            return Ok((0.0, 0.0));
        }
        let logits = self.predict(x)?;
        Ok((
            softmax_xent(logits.view(), y).0,
            misclassification(logits.view(), y),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Classifier hidden sizes; the first is the fat layer's width.
    pub hidden: Vec<usize>,
    /// Width of the shared embedding layer in learnt-embedding mode.
    pub aux_hidden: usize,
    /// Extra hidden layers inside each auxiliary network (none: a single
    /// layer maps the embedding to the fat row).
    pub aux_layers: Vec<usize>,
    pub aux_output: Activation,
    pub aux_bias: bool,
    pub activation: Activation,
    pub gamma: f64,
    /// Build the reconstruction path; defaults to `gamma > 0`.
    pub reconstruction: Option<bool>,
    pub dropout: f64,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub max_norm: Option<f64>,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![100, 100],
            aux_hidden: 100,
            aux_layers: Vec::new(),
            aux_output: Activation::Identity,
            aux_bias: true,
            activation: Activation::Relu,
            gamma: 0.0,
            reconstruction: None,
            dropout: 0.5,
            lr: 1e-3,
            rho: 0.9,
            eps: 1e-8,
            batch_size: 32,
            max_epochs: 200,
            patience: 20,
            seed: 0,
            max_norm: Some(1.0),
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn reconstruction(&self) -> bool {
        self.reconstruction.unwrap_or(self.gamma > 0.0)
    }

    pub fn last_hidden(&self) -> usize {
        *self.hidden.last().unwrap_or(&0)
    }

    pub fn regularizer(&self) -> RegularizerConfig {
        RegularizerConfig {
            dropout: self.dropout,
            max_row_norm: self.max_norm,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::arg("hidden sizes must be non-empty and positive"));
        }
        if self.aux_hidden == 0 || self.aux_layers.contains(&0) {
            return Err(Error::arg("auxiliary sizes must be positive"));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::arg("gamma must be nonnegative"));
        }
        if self.batch_size == 0 {
            return Err(Error::arg("batch size must be at least 1"));
        }
        if !(self.lr >= 0.0) || !(0.0..1.0).contains(&self.rho) || !(self.eps > 0.0) {
            return Err(Error::arg("optimizer settings out of range"));
        }
        self.regularizer().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_err: f64,
    pub valid_err: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (0: the initialisation).
    pub best_epoch: Option<usize>,
}

impl History {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,train_loss,train_err,valid_err")?;
        for r in &self.epochs {
            writeln!(
                w,
                "{},{:.10e},{:.6},{:.6}",
                r.epoch, r.train_loss, r.train_err, r.valid_err
            )?;
        }
        Ok(())
    }
}

/// Scaled inputs and labels for one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldData {
    pub x_train: Array2<f64>,
    pub y_train: Vec<usize>,
    pub x_valid: Array2<f64>,
    pub y_valid: Vec<usize>,
}

/// Per-SNP mean of `g/2` over the non-missing calls of `rows` (0 when a
/// column has no call there).
pub fn scaled_column_means(genotypes: ArrayView2<'_, u8>, rows: &[usize]) -> Array1<f64> {
    Array1::from_shape_fn(genotypes.ncols(), |j| {
        let (s, n) = rows
            .iter()
            .map(|&i| genotypes[[i, j]])
            .filter(|&g| g != MISSING)
            .fold((0.0, 0usize), |(s, n), g| (s + g as f64 / 2.0, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    })
}

/// `g ↦ g/2`, missing calls replaced by `means`.
pub fn scale_genotypes(genotypes: ArrayView2<'_, u8>, means: &Array1<f64>) -> Array2<f64> {
    Array2::from_shape_fn(genotypes.dim(), |(i, j)| match genotypes[[i, j]] {
        MISSING => means[j],
        g => g as f64 / 2.0,
    })
}

/// Scales every row of `genotypes`, imputing with means of `train_rows`.
pub fn input_scale(
    genotypes: ArrayView2<'_, u8>,
    train_rows: &[usize],
) -> (Array2<f64>, Array1<f64>) {
    let means = scaled_column_means(genotypes, train_rows);
    (scale_genotypes(genotypes, &means), means)
}

/// Loss (eval mode) and misclassification over a whole set.
pub fn evaluate(
    model: &DietNetwork,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    gamma: f64,
) -> Result<(f64, f64)> {
    if y.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = model.forward(x, Mode::Eval, &mut rng)?;
    let (ce, _) = softmax_xent(out.logits.view(), y);
    let rec = match (&out.reconstruction, gamma > 0.0) {
        (Some(r), true) => crate::nn::mse(r.view(), x).0,
        _ => 0.0,
    };
    Ok((
        ce + gamma * rec,
        misclassification(out.probabilities.view(), y),
    ))
}

/// Minibatch RMSProp on the joint objective with early stopping on
/// validation misclassification (ties broken by validation loss). The best
/// parameters seen are restored before returning.
pub fn train<M: Classifier>(
    mut model: M,
    data: &FoldData,
    cfg: &TrainConfig,
) -> Result<(M, History)> {
    cfg.validate()?;
    if data.x_train.nrows() == 0 {
        return Err(Error::arg("no training samples"));
    }
    if data.x_train.nrows() != data.y_train.len() || data.x_valid.nrows() != data.y_valid.len() {
        return Err(Error::shape("one label per sample".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut opt = RmsProp::new(cfg.lr, cfg.rho, cfg.eps);
    let reg = cfg.regularizer();
    let mut history = History::default();

    let score = |m: &M| -> Result<(f64, f64)> {
        if data.y_valid.is_empty() {
            let (l, _) = m.evaluate(data.x_train.view(), &data.y_train, cfg.gamma)?;
            Ok((0.0, l))
        } else {
            let (l, e) = m.evaluate(data.x_valid.view(), &data.y_valid, cfg.gamma)?;
            Ok((e, l))
        }
    };
    let mut best = (score(&model)?, 0usize, model.clone());
    let mut since_best = 0;

    let mut order: Vec<usize> = (0..data.x_train.nrows()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(cfg.batch_size) {
            let xb = data.x_train.select(Axis(0), idx);
            let yb: Vec<usize> = idx.iter().map(|&i| data.y_train[i]).collect();
            let grads = match model.batch_loss_and_grads(xb.view(), &yb, cfg.gamma, &mut rng) {
                Ok((loss, grads)) if loss.is_finite() => grads,
                _ => return Err(diverged(epoch, history)),
            };
            opt.step(&mut model, &grads, &reg)?;
        }
        let (train_loss, train_err) =
            match model.evaluate(data.x_train.view(), &data.y_train, cfg.gamma) {
                Ok(v) if v.0.is_finite() => v,
                _ => return Err(diverged(epoch, history)),
            };
        let s = score(&model)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            train_err,
            valid_err: if data.y_valid.is_empty() {
                f64::NAN
            } else {
                s.0
            },
        });
        if s < best.0 {
            best = (s, epoch, model.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    history.best_epoch = Some(best.1);
    Ok((best.2, history))
}

fn diverged(epoch: usize, history: History) -> Error {
    Error::Diverged {
        epoch,
        history: Box::new(history),
    }
}

/// Copies of every parameter block, in [`Parametrized`] order.
pub fn snapshot<M: Parametrized + Clone>(model: &M) -> Vec<Array2<f64>> {
    model.clone().param_values()
}
