//! Small numeric helpers shared across the models.

use ndarray::Array1;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable softmax.
pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps = logits.mapv(|x| (x - max).exp());
    let sum = exps.sum();
    exps / sum
}

/// Cross-entropy of the softmax distribution against a class index, plus
/// its gradient with respect to the logits (`p - onehot`).
pub fn cross_entropy_with_grad(logits: &Array1<f64>, label: usize) -> (f64, Array1<f64>) {
    debug_assert!(label < logits.len());
    let probs = softmax(logits);
    let loss = -(probs[label].max(f64::MIN_POSITIVE)).ln();
    let mut grad = probs;
    grad[label] -= 1.0;
    (loss, grad)
}

/// Deterministic argmax: the first coordinate attaining the maximum.
pub fn argmax(values: &Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
