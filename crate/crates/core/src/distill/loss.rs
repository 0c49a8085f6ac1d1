use super::model::StudentModel;
use crate::dictionary::SenseSet;
use crate::{dot, Embedding, Error, Result};

const PROB_FLOOR: f64 = 1e-12;

/// `logit_j = ⟨n, s_j⟩` over the token's senses.
pub fn sense_logits(senses: &SenseSet, n: &[f64]) -> Result<Vec<f64>> {
    logits_over(&senses.senses, n)
}

pub(crate) fn logits_over(senses: &[Embedding], n: &[f64]) -> Result<Vec<f64>> {
    senses
        .iter()
        .map(|s| {
            if s.len() != n.len() {
                Err(Error::DimMismatch {
                    expected: s.len(),
                    got: n.len(),
                })
            } else {
                Ok(dot(s, n))
            }
        })
        .collect()
}

/// Max-shifted softmax.
pub fn softmax_prob(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `−ln p[label]`, with `p` floored at 1e-12.
pub fn ce_loss(prob: &[f64], label: usize) -> Result<f64> {
    let p = *prob.get(label).ok_or(Error::LabelOutOfRange {
        label,
        senses: prob.len(),
    })?;
    Ok(-p.max(PROB_FLOOR).ln())
}

/// Loss gradient for every student tensor, shaped like the model's.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub(crate) fn zeros_like(model: &StudentModel) -> Self {
        Self {
            loss: 0.0,
            w1: vec![0.0; model.w1.len()],
            b1: vec![0.0; model.b1.len()],
            w2: vec![0.0; model.w2.len()],
            b2: vec![0.0; model.b2.len()],
        }
    }

    pub fn tensors(&self) -> [&Vec<f64>; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub(crate) fn accumulate(&mut self, other: &Gradients) {
        self.loss += other.loss;
        let dst = [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2];
        for (d, s) in dst.into_iter().zip(other.tensors()) {
            for (a, b) in d.iter_mut().zip(s) {
                *a += b;
            }
        }
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.loss *= factor;
        for t in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }
}

/// Analytic gradient of `ce_loss(softmax(sense_logits(student_forward(x))))`.
///
/// With `p = softmax(z)`, `∂L/∂z = p − onehot(label)` and
/// `∂L/∂n = Σ_j (p_j − [j = label]) s_j`, which is then backpropagated through
/// the affine chain.
pub fn ce_grad(
    model: &StudentModel,
    senses: &SenseSet,
    features: &[f64],
    label: usize,
) -> Result<Gradients> {
    ce_grad_over(model, &senses.senses, features, label)
}

pub(crate) fn ce_grad_over(
    model: &StudentModel,
    senses: &[Embedding],
    features: &[f64],
    label: usize,
) -> Result<Gradients> {
    if label >= senses.len() {
        return Err(Error::LabelOutOfRange {
            label,
            senses: senses.len(),
        });
    }
    let cache = model.forward_cached(features)?;
    let logits = logits_over(senses, &cache.output)?;
    let prob = softmax_prob(&logits);
    let loss = ce_loss(&prob, label)?;

    let mut g_out = vec![0.0; model.teacher_dim];
    for (j, (s, &p)) in senses.iter().zip(&prob).enumerate() {
        let dz = p - if j == label { 1.0 } else { 0.0 };
        if dz != 0.0 {
            for (g, v) in g_out.iter_mut().zip(s) {
                *g += dz * v;
            }
        }
    }

    let mut grads = Gradients::zeros_like(model);
    grads.loss = loss;
    let cols = model.w2_cols();
    for (r, &g) in g_out.iter().enumerate() {
        grads.b2[r] = g;
        for (c, h) in cache.hidden.iter().enumerate() {
            grads.w2[r * cols + c] = g * h;
        }
    }
    if model.hidden_dim > 0 {
        for h in 0..model.hidden_dim {
            let g_hidden: f64 = (0..model.teacher_dim)
                .map(|r| model.w2[r * cols + h] * g_out[r])
                .sum();
            let g_pre = g_hidden * model.activation.derivative(cache.pre[h]);
            grads.b1[h] = g_pre;
            for (c, x) in features.iter().enumerate() {
                grads.w1[h * model.feature_dim + c] = g_pre * x;
            }
        }
    }
    Ok(grads)
}
