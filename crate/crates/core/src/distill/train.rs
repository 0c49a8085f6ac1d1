use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{ce_grad_over, ce_loss, logits_over, softmax_prob, Gradients};
use super::model::{student_forward, Activation, StudentModel};
use crate::dictionary::{nearest_sense, SenseDictionary};
use crate::replacement::teacher_label;
use crate::store::OccurrenceRecord;
use crate::{argmax, Embedding, Error, Result, TokenId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::adam()),
            _ => Err(format!("unknown optimizer `{s}` (expected sgd or adam)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            optimizer: Optimizer::adam(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(
                "learning rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Student shape; input and output widths come from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StudentArch {
    pub hidden_dim: usize,
    pub activation: Activation,
}

/// Loss and teacher agreement over the training set. Epoch 0 is the model
/// before any update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub agreement: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: StudentModel,
    pub trace: Vec<EpochStats>,
    pub trained_records: usize,
    /// Records skipped because their token has no senses.
    pub skipped: usize,
}

struct Example<'a> {
    features: &'a [f64],
    senses: &'a [Embedding],
    label: usize,
}

fn labeled_examples<'a>(
    teacher: &'a [OccurrenceRecord],
    features: &'a [OccurrenceRecord],
    dict: &'a SenseDictionary,
) -> Result<(Vec<Example<'a>>, usize)> {
    if teacher.len() != features.len() {
        return Err(Error::StreamMisaligned {
            index: teacher.len().min(features.len()),
        });
    }
    let mut examples = Vec::with_capacity(teacher.len());
    let mut skipped = 0;
    for (index, (t, f)) in teacher.iter().zip(features).enumerate() {
        if t.token != f.token {
            return Err(Error::StreamMisaligned { index });
        }
        let Some(set) = dict.get(t.token) else {
            skipped += 1;
            continue;
        };
        examples.push(Example {
            features: &f.embedding,
            senses: &set.senses,
            label: teacher_label(dict, t.token, &t.embedding)?,
        });
    }
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok((examples, skipped))
}

fn evaluate(model: &StudentModel, examples: &[Example<'_>], epoch: usize) -> Result<EpochStats> {
    let mut loss = 0.0;
    let mut agree = 0usize;
    for ex in examples {
        let n = student_forward(model, ex.features)?;
        let logits = logits_over(ex.senses, &n)?;
        if argmax(logits.iter().copied()) == Some(ex.label) {
            agree += 1;
        }
        loss += ce_loss(&softmax_prob(&logits), ex.label)?;
    }
    let count = examples.len() as f64;
    Ok(EpochStats {
        epoch,
        mean_loss: loss / count,
        agreement: agree as f64 / count,
    })
}

struct AdamState {
    step: i32,
    m: [Vec<f64>; 4],
    v: [Vec<f64>; 4],
}

fn apply_update(
    model: &mut StudentModel,
    grads: &Gradients,
    config: &TrainConfig,
    adam: &mut AdamState,
) {
    let lr = config.learning_rate;
    match config.optimizer {
        Optimizer::Sgd => {
            for (w, g) in model.tensors_mut().into_iter().zip(grads.tensors()) {
                for (wi, gi) in w.iter_mut().zip(g) {
                    *wi -= lr * gi;
                }
            }
        }
        Optimizer::Adam { beta1, beta2, eps } => {
            adam.step += 1;
            let c1 = 1.0 - beta1.powi(adam.step);
            let c2 = 1.0 - beta2.powi(adam.step);
            let tensors = model.tensors_mut();
            for (t, (w, g)) in tensors.into_iter().zip(grads.tensors()).enumerate() {
                let (m, v) = (&mut adam.m[t], &mut adam.v[t]);
                for i in 0..w.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    w[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}

/// Trains a fresh student initialized from `config.seed`.
///
/// `teacher` and `features` must be aligned record for record. Labels are the
/// teacher's nearest senses, computed once.
pub fn train(
    teacher: &[OccurrenceRecord],
    features: &[OccurrenceRecord],
    dict: &SenseDictionary,
    arch: StudentArch,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let feature_dim = features.first().map_or(0, |r| r.embedding.len());
    if feature_dim == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    let model = StudentModel::init(
        feature_dim,
        arch.hidden_dim,
        dict.dim,
        arch.activation,
        config.seed,
    );
    train_from(model, teacher, features, dict, config)
}

/// Continues training from an existing model.
pub fn train_from(
    mut model: StudentModel,
    teacher: &[OccurrenceRecord],
    features: &[OccurrenceRecord],
    dict: &SenseDictionary,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    model.validate()?;
    if model.teacher_dim != dict.dim {
        return Err(Error::DimMismatch {
            expected: dict.dim,
            got: model.teacher_dim,
        });
    }
    let (examples, skipped) = labeled_examples(teacher, features, dict)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let zeros = Gradients::zeros_like(&model);
    let mut adam = AdamState {
        step: 0,
        m: [
            zeros.w1.clone(),
            zeros.b1.clone(),
            zeros.w2.clone(),
            zeros.b2.clone(),
        ],
        v: [
            zeros.w1.clone(),
            zeros.b1.clone(),
            zeros.w2.clone(),
            zeros.b2.clone(),
        ],
    };

    let mut trace = vec![evaluate(&model, &examples, 0)?];
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let mut acc = zeros.clone();
            for &i in batch {
                let ex = &examples[i];
                acc.accumulate(&ce_grad_over(&model, ex.senses, ex.features, ex.label)?);
            }
            acc.scale(1.0 / batch.len() as f64);
            apply_update(&mut model, &acc, config, &mut adam);
        }
        trace.push(evaluate(&model, &examples, epoch)?);
    }

    Ok(TrainOutcome {
        model,
        trace,
        trained_records: examples.len(),
        skipped,
    })
}

/// Sense index chosen by the student for each record; `None` marks a token
/// absent from the dictionary.
pub fn infer_labels(
    model: &StudentModel,
    dict: &SenseDictionary,
    features: &[OccurrenceRecord],
) -> Result<Vec<Option<usize>>> {
    check_dims(model, dict)?;
    features
        .iter()
        .map(|rec| {
            let n = student_forward(model, &rec.embedding)?;
            Ok(nearest_sense(dict, rec.token, &n)?.map(|m| m.index))
        })
        .collect()
}

/// Per-record output embedding: the selected sense, or the student's own
/// output when the token is absent from the dictionary.
pub fn infer_embeddings(
    model: &StudentModel,
    dict: &SenseDictionary,
    features: &[OccurrenceRecord],
) -> Result<Vec<(TokenId, Option<usize>, Embedding)>> {
    check_dims(model, dict)?;
    features
        .iter()
        .map(|rec| {
            let n = student_forward(model, &rec.embedding)?;
            Ok(match nearest_sense(dict, rec.token, &n)? {
                Some(m) => (rec.token, Some(m.index), m.sense.to_vec()),
                None => (rec.token, None, n),
            })
        })
        .collect()
}

fn check_dims(model: &StudentModel, dict: &SenseDictionary) -> Result<()> {
    if model.teacher_dim != dict.dim {
        return Err(Error::DimMismatch {
            expected: dict.dim,
            got: model.teacher_dim,
        });
    }
    Ok(())
}
