//! Central finite differences against analytic gradients.

use ndarray::Array2;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub n: usize,
    /// `‖analytic − numeric‖ / max(‖analytic‖ + ‖numeric‖, floor)`.
    pub rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockError>,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Norm floor below which a block's gradient counts as zero.
const NORM_FLOOR: f64 = 1e-10;

/// Perturbs every entry of every block by `±eps` and compares the central
/// difference of `loss` with the analytic gradient returned by `eval`.
///
/// `eval(params)` must return the loss and the gradient blocks aligned with
/// `params`. An empty parameter list passes vacuously.
pub fn gradient_check<F>(
    mut eval: F,
    names: &[String],
    params: &[Array2<f64>],
    eps: f64,
    tolerance: f64,
) -> GradCheckReport
where
    F: FnMut(&[Array2<f64>]) -> (f64, Vec<Array2<f64>>),
{
    let (_, analytic) = eval(params);
    let mut work: Vec<Array2<f64>> = params.to_vec();
    let mut blocks = Vec::with_capacity(params.len());
    for b in 0..params.len() {
        let mut numeric = Array2::<f64>::zeros(params[b].dim());
        let dims = params[b].dim();
        for i in 0..dims.0 {
            for j in 0..dims.1 {
                let orig = work[b][[i, j]];
                work[b][[i, j]] = orig + eps;
                let (lp, _) = eval(&work);
                work[b][[i, j]] = orig - eps;
                let (lm, _) = eval(&work);
                work[b][[i, j]] = orig;
                numeric[[i, j]] = (lp - lm) / (2.0 * eps);
            }
        }
        let a = &analytic[b];
        let diff = a - &numeric;
        let dn = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        let an = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rel = if an + nn < NORM_FLOOR {
            0.0
        } else {
            dn / (an + nn)
        };
        blocks.push(BlockError {
            name: names.get(b).cloned().unwrap_or_else(|| format!("block{b}")),
            n: a.len(),
            rel_error: rel,
            max_abs_error: diff.iter().fold(0.0, |m, v| m.max(v.abs())),
        });
    }
    let max_rel_error = blocks.iter().fold(0.0, |m: f64, b| m.max(b.rel_error));
    GradCheckReport {
        blocks,
        max_rel_error,
        tolerance,
        passed: max_rel_error < tolerance,
    }
}

/// Moves every parameter by an independent `U(−scale, scale)` step, so a
/// check is not evaluated exactly on a kink (zero-initialised biases often
/// put a ReLU pre-activation at 0).
pub fn perturb_params<P: super::Parametrized + ?Sized>(model: &mut P, scale: f64, seed: u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for mut p in model.params_mut() {
        p.value.mapv_inplace(|v| v + rng.gen_range(-scale..=scale));
    }
}
