use ndarray::{Array2, ArrayView2, Axis};

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut p = logits.to_owned();
    for mut row in p.axis_iter_mut(Axis(0)) {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

/// Mean cross-entropy of `softmax(logits)` against integer labels, and its
/// gradient `(softmax − onehot) / batch`.
pub fn softmax_xent(logits: ArrayView2<'_, f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let b = logits.nrows();
    assert_eq!(b, labels.len(), "one label per row");
    if b == 0 {
        return (0.0, Array2::zeros(logits.dim()));
    }
    let mut loss = 0.0;
    let mut grad = Array2::zeros(logits.dim());
    for ((row, mut g), &y) in logits.outer_iter().zip(grad.outer_iter_mut()).zip(labels) {
        assert!(y < row.len(), "label {y} out of range");
        let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let lse = m + row.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - row[y];
        for (gk, &v) in g.iter_mut().zip(row.iter()) {
            *gk = (v - lse).exp();
        }
        g[y] -= 1.0;
    }
    grad /= b as f64;
    (loss / b as f64, grad)
}

/// Sum of squared differences over the batch divided by batch size, and its
/// gradient `2(X̂ − X) / batch`.
pub fn mse(recon: ArrayView2<'_, f64>, target: ArrayView2<'_, f64>) -> (f64, Array2<f64>) {
    assert_eq!(
        recon.dim(),
        target.dim(),
        "reconstruction and target shapes differ"
    );
    let b = recon.nrows().max(1) as f64;
    let diff = &recon - &target;
    let loss = diff.iter().map(|d| d * d).sum::<f64>() / b;
    (loss, diff * (2.0 / b))
}

/// Fraction of rows whose arg-max differs from the label.
pub fn misclassification(scores: ArrayView2<'_, f64>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let wrong = argmax_rows(scores)
        .iter()
        .zip(labels)
        .filter(|(p, y)| p != y)
        .count();
    wrong as f64 / labels.len() as f64
}

/// First index of each row's maximum.
pub fn argmax_rows(scores: ArrayView2<'_, f64>) -> Vec<usize> {
    scores
        .outer_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                    if v > bv {
                        (i, v)
                    } else {
                        (bi, bv)
                    }
                })
                .0
        })
        .collect()
}
