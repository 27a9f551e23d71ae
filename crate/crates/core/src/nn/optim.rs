//! RMSProp with decoupled weight decay and per-row max-norm projection.

use ndarray::{Array2, ArrayViewMut2, Axis};

use crate::error::{Error, Result};

/// A mutable view of one parameter block, viewed as a matrix (biases are
/// `1 × n`).
pub struct ParamMut<'a> {
    pub name: String,
    /// Weight matrices receive decay and max-norm; biases do not.
    pub is_weight: bool,
    pub value: ArrayViewMut2<'a, f64>,
}

/// Anything whose parameters can be enumerated in a fixed order.
pub trait Parametrized {
    fn params_mut(&mut self) -> Vec<ParamMut<'_>>;

    fn param_names(&mut self) -> Vec<String> {
        self.params_mut().into_iter().map(|p| p.name).collect()
    }

    fn param_values(&mut self) -> Vec<Array2<f64>> {
        self.params_mut()
            .into_iter()
            .map(|p| p.value.to_owned())
            .collect()
    }

    fn set_param_values(&mut self, values: &[Array2<f64>]) -> Result<()> {
        let mut params = self.params_mut();
        if params.len() != values.len() {
            return Err(Error::shape(format!(
                "{} blocks supplied for {}",
                values.len(),
                params.len()
            )));
        }
        for (p, v) in params.iter_mut().zip(values) {
            if p.value.dim() != v.dim() {
                return Err(Error::shape(format!(
                    "block `{}` shape {:?} vs {:?}",
                    p.name,
                    p.value.dim(),
                    v.dim()
                )));
            }
            p.value.assign(v);
        }
        Ok(())
    }

    fn n_free_params(&mut self) -> usize {
        self.params_mut().iter().map(|p| p.value.len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizerConfig {
    pub dropout: f64,
    pub max_row_norm: Option<f64>,
    pub weight_decay: f64,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        RegularizerConfig {
            dropout: 0.5,
            max_row_norm: Some(1.0),
            weight_decay: 0.0,
        }
    }
}

impl RegularizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::arg(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if let Some(c) = self.max_row_norm {
            if !(c > 0.0) {
                return Err(Error::arg("max row norm must be positive"));
            }
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::arg("weight decay must be nonnegative"));
        }
        Ok(())
    }
}

/// Scales every row whose Euclidean norm exceeds `cap` back onto the ball.
/// Rows never grow, and a second projection leaves the matrix unchanged.
pub fn project_rows(mut w: ArrayViewMut2<'_, f64>, cap: f64) {
    for mut row in w.axis_iter_mut(Axis(0)) {
        let norm = row.dot(&row).sqrt();
        if norm <= cap {
            continue;
        }
        let scale = cap / norm;
        row.mapv_inplace(|v| v * scale);
        // rounding can leave the norm an ulp above the cap
        while row.dot(&row).sqrt() > cap {
            row.mapv_inplace(|v| v * (1.0 - f64::EPSILON));
        }
    }
}

/// Squared-gradient moving-average learning rate:
/// `a ← ρa + (1−ρ)g²`, `θ ← θ − lr·g/√(a+ε)`, followed for weight blocks by
/// `θ ← θ − lr·λ·θ` and the max-norm projection.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    accum: Vec<Array2<f64>>,
}

impl Default for RmsProp {
    fn default() -> Self {
        RmsProp::new(1e-3, 0.9, 1e-8)
    }
}

impl RmsProp {
    pub fn new(lr: f64, rho: f64, eps: f64) -> Self {
        RmsProp {
            lr,
            rho,
            eps,
            accum: Vec::new(),
        }
    }

    pub fn accumulators(&self) -> &[Array2<f64>] {
        &self.accum
    }

    pub fn step<P: Parametrized + ?Sized>(
        &mut self,
        model: &mut P,
        grads: &[Array2<f64>],
        reg: &RegularizerConfig,
    ) -> Result<()> {
        let params = model.params_mut();
        if params.len() != grads.len() {
            return Err(Error::shape(format!(
                "{} gradients for {} parameter blocks",
                grads.len(),
                params.len()
            )));
        }
        if self.accum.is_empty() {
            self.accum = grads.iter().map(|g| Array2::zeros(g.dim())).collect();
        }
        for ((mut p, g), a) in params.into_iter().zip(grads).zip(self.accum.iter_mut()) {
            if p.value.dim() != g.dim() {
                return Err(Error::shape(format!(
                    "gradient for `{}` has shape {:?}",
                    p.name,
                    g.dim()
                )));
            }
            let (lr, rho, eps) = (self.lr, self.rho, self.eps);
            ndarray::Zip::from(&mut p.value)
                .and(g)
                .and(a)
                .for_each(|w, &g, a| {
                    *a = rho * *a + (1.0 - rho) * g * g;
                    *w -= lr * g / (*a + eps).sqrt();
                });
            if p.is_weight {
                if reg.weight_decay > 0.0 {
                    let shrink = lr * reg.weight_decay;
                    p.value.mapv_inplace(|w| w - shrink * w);
                }
                if let Some(cap) = reg.max_row_norm {
                    project_rows(p.value.view_mut(), cap);
                }
            }
        }
        Ok(())
    }
}
