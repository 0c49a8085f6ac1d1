use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    Identity,
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Identity),
            1 => Ok(Activation::Relu),
            2 => Ok(Activation::Tanh),
            c => Err(Error::Malformed(format!("unknown activation code {c}"))),
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative at pre-activation `x`.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(format!(
                "unknown activation `{s}` (expected identity, relu or tanh)"
            )),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

/// Student encoder head plus alignment map to the teacher dimension.
///
/// With `hidden_dim > 0` the output is `W2·act(W1·x + b1) + b2`; with
/// `hidden_dim == 0` it is the affine map `W2·x + b2` and `w1`/`b1` are
/// empty. Matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentModel {
    pub feature_dim: usize,
    pub hidden_dim: usize,
    pub teacher_dim: usize,
    pub activation: Activation,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl StudentModel {
    pub fn zeros(
        feature_dim: usize,
        hidden_dim: usize,
        teacher_dim: usize,
        activation: Activation,
    ) -> Self {
        let w2_cols = if hidden_dim == 0 {
            feature_dim
        } else {
            hidden_dim
        };
        Self {
            feature_dim,
            hidden_dim,
            teacher_dim,
            activation,
            w1: vec![0.0; hidden_dim * feature_dim],
            b1: vec![0.0; hidden_dim],
            w2: vec![0.0; teacher_dim * w2_cols],
            b2: vec![0.0; teacher_dim],
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(
        feature_dim: usize,
        hidden_dim: usize,
        teacher_dim: usize,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut m = Self::zeros(feature_dim, hidden_dim, teacher_dim, activation);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |w: &mut [f64], fan_in: usize, fan_out: usize| {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in w {
                *v = rng.random_range(-a..a);
            }
        };
        if hidden_dim > 0 {
            fill(&mut m.w1, feature_dim, hidden_dim);
        }
        let w2_in = m.w2_cols();
        fill(&mut m.w2, w2_in, teacher_dim);
        m
    }

    /// Square linear model with `W2 = I`: output equals input.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, 0, dim, Activation::Identity);
        for i in 0..dim {
            m.w2[i * dim + i] = 1.0;
        }
        m
    }

    pub fn w2_cols(&self) -> usize {
        if self.hidden_dim == 0 {
            self.feature_dim
        } else {
            self.hidden_dim
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.teacher_dim == 0 {
            return Err(Error::InvalidConfig(
                "feature_dim and teacher_dim must be positive".into(),
            ));
        }
        let shapes = [
            (self.w1.len(), self.hidden_dim * self.feature_dim),
            (self.b1.len(), self.hidden_dim),
            (self.w2.len(), self.teacher_dim * self.w2_cols()),
            (self.b2.len(), self.teacher_dim),
        ];
        for (got, expected) in shapes {
            if got != expected {
                return Err(Error::DimMismatch { expected, got });
            }
        }
        let all = self
            .w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("model weights must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn forward_cached(&self, features: &[f64]) -> Result<ForwardCache> {
        if features.len() != self.feature_dim {
            return Err(Error::DimMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        let (pre, hidden) = if self.hidden_dim == 0 {
            (Vec::new(), features.to_vec())
        } else {
            let pre: Vec<f64> = affine(&self.w1, &self.b1, features);
            let hidden = pre.iter().map(|&a| self.activation.apply(a)).collect();
            (pre, hidden)
        };
        let output = affine(&self.w2, &self.b2, &hidden);
        Ok(ForwardCache {
            pre,
            hidden,
            output,
        })
    }
}

/// `W·x + b` for row-major `W` with `b.len()` rows.
fn affine(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    b.iter()
        .enumerate()
        .map(|(r, &bias)| {
            let row = &w[r * cols..(r + 1) * cols];
            bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
        })
        .collect()
}

/// Student output in teacher space.
pub fn student_forward(model: &StudentModel, features: &[f64]) -> Result<Vec<f64>> {
    Ok(model.forward_cached(features)?.output)
}
