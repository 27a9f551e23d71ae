//! Dense layers and plain MLP stacks with recorded forward traces.

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::linalg::{col_sums, matmul};
use super::{Activation, Mode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `in_dim × out_dim`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
    /// Inverted-dropout rate applied to this layer's output in train mode.
    pub dropout: f64,
    /// A layer without bias keeps `bias` at zero and reports no bias gradient.
    pub has_bias: bool,
}

impl DenseLayer {
    /// Glorot-uniform weights, zero bias.
    pub fn glorot(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let limit = (6.0 / (in_dim + out_dim).max(1) as f64).sqrt();
        DenseLayer {
            weights: Array2::from_shape_fn((in_dim, out_dim), |_| rng.gen_range(-limit..limit)),
            bias: Array1::zeros(out_dim),
            activation,
            dropout: 0.0,
            has_bias: true,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + if self.has_bias { self.bias.len() } else { 0 }
    }
}

/// Everything a layer produced on one forward pass.
#[derive(Debug, Clone)]
pub struct LayerTrace {
    pub input: Array2<f64>,
    pub pre: Array2<f64>,
    /// Scaled dropout mask (`0` or `1/(1-p)`), train mode only.
    pub mask: Option<Array2<f64>>,
    pub output: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub layers: Vec<LayerTrace>,
}

impl Trace {
    pub fn output(&self) -> &Array2<f64> {
        &self.layers.last().expect("non-empty stack").output
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

/// Inverted-dropout mask for a `shape`-sized activation.
pub fn dropout_mask(shape: (usize, usize), rate: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let keep = 1.0 / (1.0 - rate);
    Array2::from_shape_fn(shape, |_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
}

/// Computes `act(x·W + b)` and the dropout mask for one layer.
pub fn layer_forward(
    layer: &DenseLayer,
    x: ArrayView2<'_, f64>,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> LayerTrace {
    let mut pre = matmul(x, layer.weights.view());
    if layer.has_bias {
        pre += &layer.bias;
    }
    let mut output = pre.clone();
    layer.activation.apply(&mut output);
    let mask = match mode {
        Mode::Train if layer.dropout > 0.0 => {
            let m = dropout_mask(output.dim(), layer.dropout, rng);
            output *= &m;
            Some(m)
        }
        _ => None,
    };
    LayerTrace {
        input: x.to_owned(),
        pre,
        mask,
        output,
    }
}

/// Backpropagates `dout` (gradient w.r.t. the layer output) and returns the
/// parameter gradients and the gradient w.r.t. the layer input.
pub fn layer_backward(
    layer: &DenseLayer,
    t: &LayerTrace,
    dout: &Array2<f64>,
) -> (LayerGrad, Array2<f64>) {
    let mut dpre = dout.clone();
    if let Some(m) = &t.mask {
        dpre *= m;
    }
    layer.activation.backprop(&t.pre, &mut dpre);
    let dw = matmul(t.input.t(), dpre.view());
    let db = layer.has_bias.then(|| col_sums(&dpre));
    let dx = matmul(dpre.view(), layer.weights.t());
    (
        LayerGrad {
            weights: dw,
            bias: db,
        },
        dx,
    )
}

/// A stack of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    /// Layers `sizes[0] → sizes[1] → … → sizes[last]`; every layer but the
    /// last uses `hidden`, the last uses `output`.
    pub fn new(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let n = sizes.len().saturating_sub(1);
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                DenseLayer::glorot(sizes[i], sizes[i + 1], act, rng)
            })
            .collect();
        Mlp { layers }
    }

    pub fn in_dim(&self) -> Option<usize> {
        self.layers.first().map(DenseLayer::in_dim)
    }

    pub fn out_dim(&self) -> Option<usize> {
        self.layers.last().map(DenseLayer::out_dim)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(DenseLayer::n_params).sum()
    }

    /// Forward pass keeping every intermediate activation. Fails on the
    /// first layer whose output is not finite.
    pub fn forward(
        &self,
        x: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<Trace> {
        if let Some(d) = self.in_dim() {
            if x.ncols() != d {
                return Err(Error::shape(format!(
                    "input width {} but first layer expects {d}",
                    x.ncols()
                )));
            }
        }
        let mut layers: Vec<LayerTrace> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let t = match layers.last() {
                Some(prev) => layer_forward(layer, prev.output.view(), mode, rng),
                None => layer_forward(layer, x, mode, rng),
            };
            if !t.output.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { layer: i });
            }
            layers.push(t);
        }
        if layers.is_empty() {
            // identity stack
            layers.push(LayerTrace {
                input: x.to_owned(),
                pre: x.to_owned(),
                mask: None,
                output: x.to_owned(),
            });
        }
        Ok(Trace { layers })
    }

    /// Eval-mode output only.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut rng = rand::SeedableRng::seed_from_u64(0);
        let mut t = self.forward(x, Mode::Eval, &mut rng)?;
        Ok(t.layers.pop().unwrap().output)
    }

    /// Reverse pass; returns per-layer gradients and the input gradient.
    pub fn backward(&self, trace: &Trace, dout: &Array2<f64>) -> (Vec<LayerGrad>, Array2<f64>) {
        if self.layers.is_empty() {
            return (Vec::new(), dout.clone());
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = dout.clone();
        for (layer, t) in self.layers.iter().zip(&trace.layers).rev() {
            let (lg, dx) = layer_backward(layer, t, &g);
            grads.push(lg);
            g = dx;
        }
        grads.reverse();
        (grads, g)
    }
}

impl DenseLayer {
    pub(crate) fn push_params<'a>(&'a mut self, prefix: &str, out: &mut Vec<super::ParamMut<'a>>) {
        out.push(super::ParamMut {
            name: format!("{prefix}.w"),
            is_weight: true,
            value: self.weights.view_mut(),
        });
        if self.has_bias {
            out.push(super::ParamMut {
                name: format!("{prefix}.b"),
                is_weight: false,
                value: self.bias.view_mut().insert_axis(ndarray::Axis(0)),
            });
        }
    }
}

impl LayerGrad {
    pub(crate) fn push_into(self, out: &mut Vec<Array2<f64>>) {
        let n = self.weights.ncols();
        out.push(self.weights);
        if let Some(b) = self.bias {
            out.push(b.into_shape_with_order((1, n)).expect("bias is a row"));
        }
    }
}

impl Mlp {
    pub(crate) fn push_params<'a>(&'a mut self, prefix: &str, out: &mut Vec<super::ParamMut<'a>>) {
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.push_params(&format!("{prefix}{i}"), out);
        }
    }

    /// Flattens per-layer gradients in [`Parametrized`](super::Parametrized) order.
    pub fn flatten_grads(grads: Vec<LayerGrad>) -> Vec<Array2<f64>> {
        let mut out = Vec::new();
        for g in grads {
            g.push_into(&mut out);
        }
        out
    }
}

impl super::Parametrized for Mlp {
    fn params_mut(&mut self) -> Vec<super::ParamMut<'_>> {
        let mut out = Vec::new();
        self.push_params("layer", &mut out);
        out
    }
}
