//! The composite model: a basic classifier MLP whose fat input layer (and
//! optional fat reconstruction layer) is either free or predicted per SNP
//! by an auxiliary network from that SNP's embedding.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TrainConfig;
use crate::embedding::{EmbeddingKind, FeatureEmbedding};
use crate::error::{Error, Result};
use crate::nn::linalg::{col_sums, matmul};
use crate::nn::{
    dropout_mask, gradient_check, layer_backward, layer_forward, mse, project_rows, softmax,
    softmax_xent, Activation, Checkpoint, DenseLayer, GradCheckReport, LayerTrace, Mlp, Mode,
    ParamMut, Parametrized, Trace,
};

/// Input of the auxiliary networks.
#[derive(Debug, Clone, PartialEq)]
pub enum EmbeddingSource {
    /// Precomputed `N_d × N_f` embedding; receives no gradient.
    Fixed(FeatureEmbedding),
    /// Each SNP's scaled training column (`N_d × N_train`) mapped through a
    /// single dense layer shared by both auxiliary networks.
    Learnt {
        features: Array2<f64>,
        shared: DenseLayer,
        fingerprint: String,
    },
}

impl EmbeddingSource {
    /// Learnt embedding over the scaled training matrix `x_train`
    /// (samples × SNPs): a Glorot-initialised `N_train → width` layer.
    pub fn learnt(
        x_train: ArrayView2<'_, f64>,
        width: usize,
        activation: Activation,
        seed: u64,
        fingerprint: impl Into<String>,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        EmbeddingSource::Learnt {
            features: x_train.t().to_owned(),
            shared: DenseLayer::glorot(x_train.nrows(), width, activation, &mut rng),
            fingerprint: fingerprint.into(),
        }
    }

    pub fn kind(&self) -> EmbeddingKind {
        match self {
            EmbeddingSource::Fixed(e) => e.kind,
            EmbeddingSource::Learnt { .. } => EmbeddingKind::Learnt,
        }
    }

    pub fn fingerprint(&self) -> &str {
        match self {
            EmbeddingSource::Fixed(e) => &e.provenance.fingerprint,
            EmbeddingSource::Learnt { fingerprint, .. } => fingerprint,
        }
    }

    pub fn n_snps(&self) -> usize {
        match self {
            EmbeddingSource::Fixed(e) => e.n_snps(),
            EmbeddingSource::Learnt { features, .. } => features.nrows(),
        }
    }

    /// Width of the vectors fed to the auxiliary networks.
    pub fn width(&self) -> usize {
        match self {
            EmbeddingSource::Fixed(e) => e.dim(),
            EmbeddingSource::Learnt { shared, .. } => shared.out_dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FatLayers {
    /// Basic network: `W_e` (`N_d × N_h¹`) and `W_d` (`N_d × N_h_last`) are
    /// free parameters.
    Free {
        w_enc: Array2<f64>,
        w_dec: Option<Array2<f64>>,
    },
    /// Diet network: row `j` of `W_e` is `aux_enc(e_j)`, row `j` of `W_d` is
    /// `aux_dec(e_j)`.
    Predicted {
        source: EmbeddingSource,
        aux_enc: Mlp,
        aux_dec: Option<Mlp>,
    },
}

/// Fat weight matrices for the current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FatWeights {
    pub w_enc: Array2<f64>,
    pub w_dec: Option<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DietNetwork {
    pub fat: FatLayers,
    /// `b_e`, always free.
    pub fat_bias: Array1<f64>,
    pub activation: Activation,
    /// Dropout on every hidden layer of the classifier, fat layer included.
    pub dropout: f64,
    /// Hidden layers after the fat layer (`N_h¹ → … → N_h_last`).
    pub hidden: Mlp,
    /// `N_h_last → C` logits.
    pub head: DenseLayer,
    /// Reconstruction bias (`N_d`), present iff the reconstruction path is.
    pub recon_bias: Option<Array1<f64>>,
}

struct FatTrace {
    shared: Option<LayerTrace>,
    enc: Option<Trace>,
    dec: Option<Trace>,
    weights: FatWeights,
}

/// Everything needed to backpropagate one forward pass.
pub struct DietTrace {
    fat: FatTrace,
    x: Array2<f64>,
    pre1: Array2<f64>,
    mask1: Option<Array2<f64>>,
    hidden: Trace,
    head: LayerTrace,
}

pub struct DietOutput {
    pub logits: Array2<f64>,
    pub probabilities: Array2<f64>,
    pub reconstruction: Option<Array2<f64>>,
    pub trace: DietTrace,
}

/// Value of the joint objective and its gradients w.r.t. logits and
/// reconstruction.
#[derive(Debug, Clone)]
pub struct DietLoss {
    pub total: f64,
    pub cross_entropy: f64,
    pub reconstruction: f64,
    pub dlogits: Array2<f64>,
    pub drecon: Option<Array2<f64>>,
}

/// Cross-entropy plus `gamma` times the batch-mean squared reconstruction
/// error. With `gamma == 0` the reconstruction term is dropped entirely.
pub fn loss_diet(
    logits: ArrayView2<'_, f64>,
    labels: &[usize],
    reconstruction: Option<ArrayView2<'_, f64>>,
    x: ArrayView2<'_, f64>,
    gamma: f64,
) -> DietLoss {
    let (ce, dlogits) = softmax_xent(logits, labels);
    let (rec, drecon) = match reconstruction {
        Some(r) if gamma > 0.0 => {
            let (l, d) = mse(r, x);
            (l, Some(d * gamma))
        }
        _ => (0.0, None),
    };
    DietLoss {
        total: ce + gamma * rec,
        cross_entropy: ce,
        reconstruction: rec,
        dlogits,
        drecon,
    }
}

fn glorot_std(fan_in: usize, fan_out: usize) -> f64 {
    (2.0 / (fan_in + fan_out).max(1) as f64).sqrt()
}

fn std_dev(a: &Array2<f64>) -> f64 {
    let n = a.len().max(1) as f64;
    let mean = a.sum() / n;
    (a.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

impl DietNetwork {
    fn trunk(
        n_d: usize,
        n_classes: usize,
        cfg: &TrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> (Array1<f64>, Mlp, DenseLayer, Option<Array1<f64>>) {
        let mut hidden = Mlp::new(&cfg.hidden, cfg.activation, cfg.activation, rng);
        for l in &mut hidden.layers {
            l.dropout = cfg.dropout;
        }
        let last = *cfg
            .hidden
            .last()
            .expect("validated: at least one hidden layer");
        let head = DenseLayer::glorot(last, n_classes, Activation::Identity, rng);
        let recon_bias = cfg.reconstruction().then(|| Array1::zeros(n_d));
        (Array1::zeros(cfg.hidden[0]), hidden, head, recon_bias)
    }

    /// Basic network with free fat layers.
    pub fn basic(n_d: usize, n_classes: usize, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let h1 = cfg.hidden[0];
        let w_enc = DenseLayer::glorot(n_d, h1, Activation::Identity, &mut rng).weights;
        let (fat_bias, hidden, head, recon_bias) = Self::trunk(n_d, n_classes, cfg, &mut rng);
        let w_dec = recon_bias.as_ref().map(|_| {
            DenseLayer::glorot(n_d, cfg.last_hidden(), Activation::Identity, &mut rng).weights
        });
        let mut net = DietNetwork {
            fat: FatLayers::Free { w_enc, w_dec },
            fat_bias,
            activation: cfg.activation,
            dropout: cfg.dropout,
            hidden,
            head,
            recon_bias,
        };
        net.project(cfg.max_norm);
        Ok(net)
    }

    /// Diet network whose fat layers are predicted from `source`.
    ///
    /// The auxiliary output layers are rescaled at construction so that the
    /// predicted fat matrices start with the spread a Glorot initialisation
    /// of the basic network would have.
    pub fn diet(source: EmbeddingSource, n_classes: usize, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n_d = source.n_snps();
        let width = source.width();
        let aux = |out: usize, rng: &mut ChaCha8Rng| {
            let mut sizes = vec![width];
            sizes.extend(&cfg.aux_layers);
            sizes.push(out);
            let mut m = Mlp::new(&sizes, cfg.activation, cfg.aux_output, rng);
            if !cfg.aux_bias {
                for l in &mut m.layers {
                    l.has_bias = false;
                }
            }
            m
        };
        let aux_enc = aux(cfg.hidden[0], &mut rng);
        let (fat_bias, hidden, head, recon_bias) = Self::trunk(n_d, n_classes, cfg, &mut rng);
        let aux_dec = recon_bias
            .as_ref()
            .map(|_| aux(cfg.last_hidden(), &mut rng));
        let mut net = DietNetwork {
            fat: FatLayers::Predicted {
                source,
                aux_enc,
                aux_dec,
            },
            fat_bias,
            activation: cfg.activation,
            dropout: cfg.dropout,
            hidden,
            head,
            recon_bias,
        };
        net.rescale_aux()?;
        net.project(cfg.max_norm);
        Ok(net)
    }

    fn rescale_aux(&mut self) -> Result<()> {
        let h1 = self.fat_bias.len();
        let h_last = self.head.in_dim();
        let w = self.predict_fat_weights()?;
        let n_d = w.w_enc.nrows();
        let enc_scale = glorot_std(n_d, h1) / std_dev(&w.w_enc);
        let dec_scale = w
            .w_dec
            .as_ref()
            .map(|d| glorot_std(n_d, h_last) / std_dev(d));
        if let FatLayers::Predicted {
            aux_enc, aux_dec, ..
        } = &mut self.fat
        {
            scale_output_layer(aux_enc, enc_scale);
            if let (Some(m), Some(s)) = (aux_dec.as_mut(), dec_scale) {
                scale_output_layer(m, s);
            }
        }
        Ok(())
    }

    fn project(&mut self, cap: Option<f64>) {
        if let Some(cap) = cap {
            for p in self.params_mut() {
                if p.is_weight {
                    project_rows(p.value, cap);
                }
            }
        }
    }

    pub fn n_snps(&self) -> usize {
        match &self.fat {
            FatLayers::Free { w_enc, .. } => w_enc.nrows(),
            FatLayers::Predicted { source, .. } => source.n_snps(),
        }
    }

    pub fn n_classes(&self) -> usize {
        self.head.out_dim()
    }

    pub fn has_reconstruction(&self) -> bool {
        self.recon_bias.is_some()
    }

    pub fn is_basic(&self) -> bool {
        matches!(self.fat, FatLayers::Free { .. })
    }

    pub fn embedding_kind(&self) -> Option<EmbeddingKind> {
        match &self.fat {
            FatLayers::Free { .. } => None,
            FatLayers::Predicted { source, .. } => Some(source.kind()),
        }
    }

    /// Free parameters of the fat layers: `W_e`/`W_d` for the basic network,
    /// the auxiliary networks (and shared embedding layer) otherwise.
    pub fn fat_free_params(&self) -> usize {
        match &self.fat {
            FatLayers::Free { w_enc, w_dec } => w_enc.len() + w_dec.as_ref().map_or(0, |w| w.len()),
            FatLayers::Predicted {
                source,
                aux_enc,
                aux_dec,
            } => {
                let shared = match source {
                    EmbeddingSource::Learnt { shared, .. } => shared.n_params(),
                    EmbeddingSource::Fixed(_) => 0,
                };
                shared + aux_enc.n_params() + aux_dec.as_ref().map_or(0, Mlp::n_params)
            }
        }
    }

    fn fat_forward(&self) -> Result<FatTrace> {
        match &self.fat {
            FatLayers::Free { w_enc, w_dec } => Ok(FatTrace {
                shared: None,
                enc: None,
                dec: None,
                weights: FatWeights {
                    w_enc: w_enc.clone(),
                    w_dec: w_dec.clone(),
                },
            }),
            FatLayers::Predicted {
                source,
                aux_enc,
                aux_dec,
            } => {
                // aux networks never use dropout, so this rng is never drawn
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                let shared = match source {
                    EmbeddingSource::Learnt {
                        features, shared, ..
                    } => {
                        let t = layer_forward(shared, features.view(), Mode::Eval, &mut rng);
                        if !t.output.iter().all(|v| v.is_finite()) {
                            return Err(Error::NonFinite { layer: 0 });
                        }
                        Some(t)
                    }
                    EmbeddingSource::Fixed(_) => None,
                };
                let e = match (&shared, source) {
                    (Some(t), _) => t.output.view(),
                    (None, EmbeddingSource::Fixed(fe)) => fe.matrix.view(),
                    (None, EmbeddingSource::Learnt { .. }) => unreachable!(),
                };
                let enc = aux_enc.forward(e, Mode::Eval, &mut rng)?;
                let dec = aux_dec
                    .as_ref()
                    .map(|m| m.forward(e, Mode::Eval, &mut rng))
                    .transpose()?;
                let weights = FatWeights {
                    w_enc: enc.output().clone(),
                    w_dec: dec.as_ref().map(|t| t.output().clone()),
                };
                Ok(FatTrace {
                    shared,
                    enc: Some(enc),
                    dec,
                    weights,
                })
            }
        }
    }

    /// Current fat weight matrices (`W_e` and, with reconstruction, `W_d`).
    pub fn predict_fat_weights(&self) -> Result<FatWeights> {
        Ok(self.fat_forward()?.weights)
    }

    /// Full forward pass on a batch of scaled genotypes.
    pub fn forward(
        &self,
        x: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<DietOutput> {
        if x.ncols() != self.n_snps() {
            return Err(Error::shape(format!(
                "batch has {} columns, model expects {}",
                x.ncols(),
                self.n_snps()
            )));
        }
        let fat = self.fat_forward()?;
        let mut pre1 = matmul(x, fat.weights.w_enc.view());
        pre1 += &self.fat_bias;
        let mut h1 = pre1.clone();
        self.activation.apply(&mut h1);
        let mask1 = match mode {
            Mode::Train if self.dropout > 0.0 => {
                let m = dropout_mask(h1.dim(), self.dropout, rng);
                h1 *= &m;
                Some(m)
            }
            _ => None,
        };
        if !h1.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { layer: 0 });
        }
        let hidden = self
            .hidden
            .forward(h1.view(), mode, rng)
            .map_err(|e| match e {
                Error::NonFinite { layer } => Error::NonFinite { layer: layer + 1 },
                e => e,
            })?;
        let head = layer_forward(&self.head, hidden.output().view(), Mode::Eval, rng);
        if !head.output.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                layer: self.hidden.layers.len() + 1,
            });
        }
        let reconstruction = match (&fat.weights.w_dec, &self.recon_bias) {
            (Some(w_dec), Some(b)) => {
                let mut r = matmul(hidden.output().view(), w_dec.t());
                r += b;
                Some(r)
            }
            _ => None,
        };
        let logits = head.output.clone();
        Ok(DietOutput {
            probabilities: softmax(logits.view()),
            logits,
            reconstruction,
            trace: DietTrace {
                fat,
                x: x.to_owned(),
                pre1,
                mask1,
                hidden,
                head,
            },
        })
    }

    /// Eval-mode class probabilities.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Ok(self.forward(x, Mode::Eval, &mut rng)?.probabilities)
    }

    /// Exact gradients of the objective, in [`Parametrized`] order.
    ///
    /// `drecon` must already carry the `gamma` factor; `None` means the
    /// reconstruction path contributes nothing.
    pub fn backward(
        &self,
        trace: &DietTrace,
        dlogits: &Array2<f64>,
        drecon: Option<&Array2<f64>>,
    ) -> Vec<Array2<f64>> {
        let (head_grad, mut dh_last) = layer_backward(&self.head, &trace.head, dlogits);

        let mut dw_dec = None;
        let mut db_rec = None;
        if let (Some(dr), Some(w_dec)) = (drecon, &trace.fat.weights.w_dec) {
            dh_last += &matmul(dr.view(), w_dec.view());
            dw_dec = Some(matmul(dr.t(), trace.hidden.output().view()));
            db_rec = Some(col_sums(dr));
        }
        let n_d = self.n_snps();
        let w_dec_zero = || Array2::zeros((n_d, self.head.in_dim()));

        let (hidden_grads, dh1) = self.hidden.backward(&trace.hidden, &dh_last);
        let mut dpre1 = dh1;
        if let Some(m) = &trace.mask1 {
            dpre1 *= m;
        }
        self.activation.backprop(&trace.pre1, &mut dpre1);
        let db_e = col_sums(&dpre1);
        let dw_enc = matmul(trace.x.t(), dpre1.view());

        let mut grads = Vec::new();
        match &self.fat {
            FatLayers::Free { w_dec, .. } => {
                grads.push(dw_enc);
                if w_dec.is_some() {
                    grads.push(dw_dec.unwrap_or_else(w_dec_zero));
                }
            }
            FatLayers::Predicted {
                source,
                aux_enc,
                aux_dec,
            } => {
                let (enc_grads, mut de) =
                    aux_enc.backward(trace.fat.enc.as_ref().expect("predicted"), &dw_enc);
                let dec_grads = aux_dec.as_ref().map(|m| {
                    let dw = dw_dec.clone().unwrap_or_else(w_dec_zero);
                    let (g, de_dec) =
                        m.backward(trace.fat.dec.as_ref().expect("decoder trace"), &dw);
                    de += &de_dec;
                    g
                });
                if let EmbeddingSource::Learnt { shared, .. } = source {
                    let (g, _) =
                        layer_backward(shared, trace.fat.shared.as_ref().expect("learnt"), &de);
                    g.push_into(&mut grads);
                }
                grads.extend(Mlp::flatten_grads(enc_grads));
                if let Some(g) = dec_grads {
                    grads.extend(Mlp::flatten_grads(g));
                }
            }
        }
        grads.push(db_e.insert_axis(Axis(0)));
        grads.extend(Mlp::flatten_grads(hidden_grads));
        head_grad.push_into(&mut grads);
        if self.recon_bias.is_some() {
            let b = db_rec.unwrap_or_else(|| Array1::zeros(n_d));
            grads.push(b.insert_axis(Axis(0)));
        }
        grads
    }

    /// Loss and gradients on one batch.
    pub fn loss_and_grads(
        &self,
        x: ArrayView2<'_, f64>,
        labels: &[usize],
        gamma: f64,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<(DietLoss, Vec<Array2<f64>>)> {
        let out = self.forward(x, mode, rng)?;
        let loss = loss_diet(
            out.logits.view(),
            labels,
            out.reconstruction.as_ref().map(|r| r.view()),
            x,
            gamma,
        );
        let grads = self.backward(&out.trace, &loss.dlogits, loss.drecon.as_ref());
        Ok((loss, grads))
    }
}

fn scale_output_layer(m: &mut Mlp, s: f64) {
    if !s.is_finite() || s <= 0.0 {
        return;
    }
    if let Some(l) = m.layers.last_mut() {
        l.weights *= s;
        l.bias *= s;
    }
}

impl Parametrized for DietNetwork {
    fn params_mut(&mut self) -> Vec<ParamMut<'_>> {
        let mut out = Vec::new();
        match &mut self.fat {
            FatLayers::Free { w_enc, w_dec } => {
                out.push(ParamMut {
                    name: "fat.w_enc".into(),
                    is_weight: true,
                    value: w_enc.view_mut(),
                });
                if let Some(w) = w_dec {
                    out.push(ParamMut {
                        name: "fat.w_dec".into(),
                        is_weight: true,
                        value: w.view_mut(),
                    });
                }
            }
            FatLayers::Predicted {
                source,
                aux_enc,
                aux_dec,
            } => {
                if let EmbeddingSource::Learnt { shared, .. } = source {
                    shared.push_params("embed", &mut out);
                }
                aux_enc.push_params("aux_enc", &mut out);
                if let Some(m) = aux_dec {
                    m.push_params("aux_dec", &mut out);
                }
            }
        }
        out.push(ParamMut {
            name: "fat.b_enc".into(),
            is_weight: false,
            value: self.fat_bias.view_mut().insert_axis(Axis(0)),
        });
        self.hidden.push_params("hidden", &mut out);
        self.head.push_params("head", &mut out);
        if let Some(b) = &mut self.recon_bias {
            out.push(ParamMut {
                name: "recon.b".into(),
                is_weight: false,
                value: b.view_mut().insert_axis(Axis(0)),
            });
        }
        out
    }
}

impl DietNetwork {
    /// Finite-difference check of the full joint objective on `(x, y)` at
    /// the current parameters. Every evaluation reuses the dropout masks
    /// drawn from `mask_seed`.
    pub fn check_gradients(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        gamma: f64,
        eps: f64,
        tolerance: f64,
        mask_seed: u64,
    ) -> GradCheckReport {
        let mut probe = self.clone();
        let names = probe.param_names();
        let params = probe.param_values();
        gradient_check(
            |p| {
                let mut m = self.clone();
                if m.set_param_values(p).is_err() {
                    return (f64::NAN, Vec::new());
                }
                let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
                match m.loss_and_grads(x, y, gamma, Mode::Train, &mut rng) {
                    Ok((l, g)) => (l.total, g),
                    Err(_) => (f64::NAN, Vec::new()),
                }
            },
            &names,
            &params,
            eps,
            tolerance,
        )
    }

    /// `key=value` description of the variant and the embedding it was
    /// built on.
    pub fn metadata(&self) -> String {
        let mut lines = vec![
            format!("variant={}", if self.is_basic() { "basic" } else { "diet" }),
            format!("n_snps={}", self.n_snps()),
            format!("n_classes={}", self.n_classes()),
            format!("reconstruction={}", self.has_reconstruction()),
            format!("activation={}", self.activation.name()),
        ];
        if let FatLayers::Predicted { source, .. } = &self.fat {
            lines.push(format!("embedding={}", source.kind().name()));
            lines.push(format!("fingerprint={}", source.fingerprint()));
            if let EmbeddingSource::Fixed(e) = source {
                lines.push(format!("embedding_seed={}", e.provenance.seed));
                lines.push(format!("embedding_params={}", e.provenance.params));
            }
        }
        lines.join("\n")
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut m = self.clone();
        let blocks = m
            .params_mut()
            .into_iter()
            .map(|p| (p.name, p.value.to_owned()))
            .collect();
        Checkpoint {
            metadata: self.metadata(),
            blocks,
        }
    }

    /// Restores parameters saved by [`checkpoint`](Self::checkpoint) into a
    /// network of the same architecture built on the same embedding.
    pub fn load_checkpoint(&mut self, ck: &Checkpoint) -> Result<()> {
        let want = self.metadata();
        if ck.metadata != want {
            let key = |s: &str| {
                s.lines()
                    .find(|l| l.starts_with("fingerprint="))
                    .map(str::to_owned)
            };
            if let (Some(expected), Some(found)) = (key(&want), key(&ck.metadata)) {
                if expected != found {
                    return Err(Error::Provenance { expected, found });
                }
            }
            return Err(Error::Format(format!(
                "checkpoint describes `{}`",
                ck.metadata.replace('\n', ", ")
            )));
        }
        let names = self.param_names();
        if names.len() != ck.blocks.len() || names.iter().zip(&ck.blocks).any(|(a, (b, _))| a != b)
        {
            return Err(Error::Format(
                "checkpoint blocks do not match the network".into(),
            ));
        }
        let values: Vec<Array2<f64>> = ck.blocks.iter().map(|(_, v)| v.clone()).collect();
        self.set_param_values(&values)
    }
}
