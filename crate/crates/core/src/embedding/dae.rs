//! Denoising autoencoder over sample rows and the SNP2Vec read-out.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EmbeddingKind, FeatureEmbedding, Provenance};
use crate::error::{Error, Result};
use crate::nn::{
    mse, Activation, DenseLayer, Mlp, Mode, ParamMut, Parametrized, RegularizerConfig, RmsProp,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DaeConfig {
    pub hidden_dim: usize,
    /// Fraction of inputs zeroed per presentation.
    pub corruption_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for DaeConfig {
    fn default() -> Self {
        DaeConfig {
            hidden_dim: 100,
            corruption_rate: 0.25,
            epochs: 50,
            batch_size: 32,
            lr: 1e-3,
            activation: Activation::Relu,
            seed: 0,
        }
    }
}

/// One-hidden-layer autoencoder: `x → f(xW₁ + b₁) → hW₂ + b₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dae {
    pub encoder: DenseLayer,
    pub decoder: DenseLayer,
}

impl Dae {
    pub fn new(n_d: usize, hidden: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        Dae {
            encoder: DenseLayer::glorot(n_d, hidden, activation, rng),
            decoder: DenseLayer::glorot(hidden, n_d, Activation::Identity, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.encoder.in_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.out_dim()
    }

    fn as_mlp(&self) -> Mlp {
        Mlp {
            layers: vec![self.encoder.clone(), self.decoder.clone()],
        }
    }

    pub fn reconstruct(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.as_mlp().predict(x)
    }
}

impl Parametrized for Dae {
    fn params_mut(&mut self) -> Vec<ParamMut<'_>> {
        let mut out = Vec::new();
        self.encoder.push_params("encoder", &mut out);
        self.decoder.push_params("decoder", &mut out);
        out
    }
}

/// Masking noise: each entry is zeroed independently with probability `rate`.
pub fn corrupt(x: ArrayView2<'_, f64>, rate: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut out = x.to_owned();
    if rate > 0.0 {
        out.mapv_inplace(|v| if rng.gen::<f64>() < rate { 0.0 } else { v });
    }
    out
}

/// Trains on scaled genotype rows; returns the model and the mean minibatch
/// loss of every epoch.
pub fn train_dae(x: ArrayView2<'_, f64>, config: &DaeConfig) -> Result<(Dae, Vec<f64>)> {
    if config.hidden_dim == 0 {
        return Err(Error::arg("DAE hidden dimension must be at least 1"));
    }
    if !(0.0..1.0).contains(&config.corruption_rate) {
        return Err(Error::arg(format!(
            "corruption rate {} outside [0, 1)",
            config.corruption_rate
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dae = Dae::new(x.ncols(), config.hidden_dim, config.activation, &mut rng);
    let mut opt = RmsProp::new(config.lr, 0.9, 1e-8);
    let reg = RegularizerConfig {
        dropout: 0.0,
        max_row_norm: None,
        weight_decay: 0.0,
    };
    let n = x.nrows();
    let batch = config.batch_size.max(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for idx in order.chunks(batch) {
            let clean = x.select(Axis(0), idx);
            let noisy = corrupt(clean.view(), config.corruption_rate, &mut rng);
            let mlp = dae.as_mlp();
            let trace = mlp
                .forward(noisy.view(), Mode::Train, &mut rng)
                .map_err(|_| diverged(epoch))?;
            let (loss, d) = mse(trace.output().view(), clean.view());
            if !loss.is_finite() {
                return Err(diverged(epoch));
            }
            let grads = Mlp::flatten_grads(mlp.backward(&trace, &d).0);
            opt.step(&mut dae, &grads, &reg)?;
            total += loss;
            batches += 1;
        }
        losses.push(if batches == 0 {
            0.0
        } else {
            total / batches as f64
        });
    }
    Ok((dae, losses))
}

fn diverged(epoch: usize) -> Error {
    Error::Diverged {
        epoch,
        history: Box::default(),
    }
}

/// Row `j` is the encoder's hidden code for an input where only SNP `j` is
/// active with value `alpha`: `f(alpha · W₁[j, :] + b₁)`.
pub fn embed_snp2vec(dae: &Dae, n_d: usize, alpha: f64) -> Result<FeatureEmbedding> {
    if dae.input_dim() != n_d {
        return Err(Error::shape(format!(
            "DAE input width {} but {n_d} SNPs",
            dae.input_dim()
        )));
    }
    let mut e = &dae.encoder.weights * alpha;
    if dae.encoder.has_bias {
        e += &dae.encoder.bias;
    }
    dae.encoder.activation.apply(&mut e);
    FeatureEmbedding::new(
        e,
        EmbeddingKind::Snp2Vec,
        Provenance {
            fingerprint: String::new(),
            seed: 0,
            params: format!("hidden={};alpha={alpha}", dae.hidden_dim()),
        },
    )
}
