//! Softmax-regression classification head trained on frozen embeddings.

use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::encoder::SentenceEmbedding;
use crate::error::{Error, Result};
use crate::optim::{Adam, AdamConfig};

/// Head training parameters. The optimizer is the shared Adam implementation
/// with its stock moment coefficients; only the learning rate is configured
/// here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadConfig {
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
    /// L2-normalize embeddings before training and prediction.
    pub normalize_embeddings: bool,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            l2_lambda: 1e-4,
            learning_rate: 0.1,
            iterations: 300,
            seed: 0,
            normalize_embeddings: true,
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2_lambda < 0.0 {
            return Err(Error::Config("l2_lambda must be nonnegative".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("head learning rate must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::Config("head iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trained head: class weights, bias, the class order fixing row meaning,
/// and whether inputs are L2-normalized before scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    weights: Vec<f32>,
    bias: Vec<f32>,
    class_order: Vec<Sentiment>,
    normalize: bool,
}

impl HeadParams {
    pub fn from_parts(
        weights: Vec<f32>,
        bias: Vec<f32>,
        class_order: Vec<Sentiment>,
        normalize: bool,
    ) -> Result<Self> {
        let classes = class_order.len();
        if classes < 2 {
            return Err(Error::SingleClass(classes));
        }
        if bias.len() != classes || weights.len() % classes != 0 {
            return Err(Error::Dimension {
                expected: classes,
                got: bias.len(),
            });
        }
        Ok(HeadParams {
            weights,
            bias,
            class_order,
            normalize,
        })
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn class_order(&self) -> &[Sentiment] {
        &self.class_order
    }

    pub fn normalize(&self) -> bool {
        self.normalize
    }

    pub fn dim(&self) -> usize {
        self.weights.len() / self.class_order.len()
    }

    /// Frobenius norm of the weight block.
    pub fn weight_norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|&w| f64::from(w) * f64::from(w))
            .sum::<f64>()
            .sqrt()
    }
}

/// A predicted label with the full probability vector (class_order order).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Sentiment,
    pub probabilities: Vec<f64>,
}

fn l2_normalized(vector: &[f32], id: &str) -> Result<Vec<f64>> {
    let norm: f64 = vector.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm(id.to_string()));
    }
    Ok(vector.iter().map(|&v| f64::from(v) / norm).collect())
}

/// Mean cross-entropy plus `(l2/2) * |W|^2` for flat parameters
/// `theta = [W row-major | bias]` over `n` points `x` (flattened n x dim).
pub fn head_objective(
    theta: &[f64],
    x: &[f64],
    y: &[usize],
    n_classes: usize,
    dim: usize,
    l2: f64,
) -> f64 {
    let n = y.len();
    let (w, b) = theta.split_at(n_classes * dim);
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let xi = &x[i * dim..(i + 1) * dim];
        let logits: Vec<f64> = (0..n_classes)
            .map(|c| {
                b[c] + w[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(xi)
                    .map(|(&wk, &xk)| wk * xk)
                    .sum::<f64>()
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
        loss += log_sum - logits[label];
    }
    loss / n as f64 + 0.5 * l2 * w.iter().map(|&v| v * v).sum::<f64>()
}

/// Objective value and gradient with respect to `theta`.
pub fn head_objective_grad(
    theta: &[f64],
    x: &[f64],
    y: &[usize],
    n_classes: usize,
    dim: usize,
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = y.len();
    let (w, b) = theta.split_at(n_classes * dim);
    let mut grad = vec![0.0; theta.len()];
    let (gw, gb) = grad.split_at_mut(n_classes * dim);
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let xi = &x[i * dim..(i + 1) * dim];
        let logits: Vec<f64> = (0..n_classes)
            .map(|c| {
                b[c] + w[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(xi)
                    .map(|(&wk, &xk)| wk * xk)
                    .sum::<f64>()
            })
            .collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
        loss += sum_exp.ln() + max - logits[label];
        for c in 0..n_classes {
            let p = (logits[c] - max).exp() / sum_exp;
            let delta = (p - if c == label { 1.0 } else { 0.0 }) * inv_n;
            gb[c] += delta;
            for k in 0..dim {
                gw[c * dim + k] += delta * xi[k];
            }
        }
    }
    loss *= inv_n;
    loss += 0.5 * l2 * w.iter().map(|&v| v * v).sum::<f64>();
    for (g, &wv) in gw.iter_mut().zip(w) {
        *g += l2 * wv;
    }
    (loss, grad)
}

/// Trains the head by full-batch Adam from zero initialization for the
/// configured iteration count. Returns the trained parameters and the final
/// objective value.
pub fn train_head(
    embeddings: &[SentenceEmbedding],
    labels: &[Sentiment],
    config: &HeadConfig,
) -> Result<(HeadParams, f64)> {
    config.validate()?;
    if embeddings.len() != labels.len() {
        return Err(Error::Config(format!(
            "{} embeddings but {} labels",
            embeddings.len(),
            labels.len()
        )));
    }
    if embeddings.is_empty() {
        return Err(Error::Config("no training embeddings".into()));
    }
    let dim = embeddings[0].vector.len();
    for e in embeddings {
        if e.vector.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: e.vector.len(),
            });
        }
    }

    let mut class_order: Vec<Sentiment> = Vec::new();
    for &label in labels {
        if !class_order.contains(&label) {
            class_order.push(label);
        }
    }
    if class_order.len() < 2 {
        return Err(Error::SingleClass(class_order.len()));
    }
    let n_classes = class_order.len();
    let y: Vec<usize> = labels
        .iter()
        .map(|l| class_order.iter().position(|c| c == l).unwrap())
        .collect();

    let mut x = Vec::with_capacity(embeddings.len() * dim);
    for e in embeddings {
        if config.normalize_embeddings {
            x.extend(l2_normalized(&e.vector, &e.source_id)?);
        } else {
            x.extend(e.vector.iter().map(|&v| f64::from(v)));
        }
    }

    let mut theta = vec![0.0f32; n_classes * dim + n_classes];
    let mut adam = Adam::new(
        theta.len(),
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    for _ in 0..config.iterations {
        let theta64: Vec<f64> = theta.iter().map(|&v| f64::from(v)).collect();
        let (_, grad) = head_objective_grad(&theta64, &x, &y, n_classes, dim, config.l2_lambda);
        adam.step_dense(&mut theta, &grad);
    }
    let theta64: Vec<f64> = theta.iter().map(|&v| f64::from(v)).collect();
    let final_loss = head_objective(&theta64, &x, &y, n_classes, dim, config.l2_lambda);

    let bias = theta.split_off(n_classes * dim);
    let params = HeadParams {
        weights: theta,
        bias,
        class_order,
        normalize: config.normalize_embeddings,
    };
    Ok((params, final_loss))
}

/// Scores one embedding: logits, stable softmax, argmax with ties broken
/// toward the smallest class index.
pub fn predict(head: &HeadParams, embedding: &SentenceEmbedding) -> Result<Prediction> {
    let dim = head.dim();
    if embedding.vector.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: embedding.vector.len(),
        });
    }
    let x: Vec<f64> = if head.normalize {
        l2_normalized(&embedding.vector, &embedding.source_id)?
    } else {
        embedding.vector.iter().map(|&v| f64::from(v)).collect()
    };
    let n_classes = head.class_order.len();
    let logits: Vec<f64> = (0..n_classes)
        .map(|c| {
            f64::from(head.bias[c])
                + head.weights[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(&x)
                    .map(|(&w, &xk)| f64::from(w) * xk)
                    .sum::<f64>()
        })
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let probabilities: Vec<f64> = exps.iter().map(|&e| e / sum).collect();
    let mut best = 0;
    for (c, &p) in probabilities.iter().enumerate() {
        if p > probabilities[best] {
            best = c;
        }
    }
    Ok(Prediction {
        label: head.class_order[best],
        probabilities,
    })
}
