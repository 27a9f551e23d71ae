//! Minimal dense network engine with analytic gradients.

mod checkpoint;
mod gradcheck;
mod layer;
pub mod linalg;
mod loss;
mod optim;

pub use checkpoint::{read_checkpoint, write_checkpoint, write_checkpoint_csv, Checkpoint};
pub use gradcheck::{gradient_check, perturb_params, BlockError, GradCheckReport};
pub use layer::{
    dropout_mask, layer_backward, layer_forward, DenseLayer, LayerGrad, LayerTrace, Mlp, Trace,
};
pub use loss::{argmax_rows, misclassification, mse, softmax, softmax_xent};
pub use optim::{project_rows, ParamMut, Parametrized, RegularizerConfig, RmsProp};

use ndarray::Array2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Activation {
    #[default]
    Relu,
    Identity,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" | "rectifier" => Some(Activation::Relu),
            "identity" | "linear" => Some(Activation::Identity),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    pub fn eval(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
            Activation::Tanh => z.tanh(),
        }
    }

    pub fn apply(self, z: &mut Array2<f64>) {
        if self != Activation::Identity {
            z.mapv_inplace(|v| self.eval(v));
        }
    }

    /// Multiplies `grad` in place by the derivative at pre-activation `pre`.
    pub fn backprop(self, pre: &Array2<f64>, grad: &mut Array2<f64>) {
        match self {
            Activation::Identity => {}
            Activation::Relu => grad.zip_mut_with(pre, |g, &z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Tanh => grad.zip_mut_with(pre, |g, &z| {
                let t = z.tanh();
                *g *= 1.0 - t * t
            }),
        }
    }
}

/// Train mode samples dropout masks; eval mode is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}
