use rand::Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::seed::{self, stream};

/// How the classifier head starts out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadInit {
    /// All-zero weights: the untrained model predicts the uniform
    /// distribution.
    Zero,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub input_size: usize,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub attention_dim: usize,
    pub num_classes: usize,
    /// Dropout between stacked layers, training mode only.
    pub dropout: f64,
    pub head_init: HeadInit,
}

impl Default for ModelConfig {
    /// Three bidirectional layers of 512 units, dropout 0.4.
    fn default() -> Self {
        Self {
            input_size: 5,
            hidden_size: 512,
            num_layers: 3,
            attention_dim: 512,
            num_classes: ProtocolLabel::COUNT,
            dropout: 0.4,
            head_init: HeadInit::Zero,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.hidden_size == 0 || self.num_layers == 0 || self.attention_dim == 0 {
            return Err(Error::InvalidArgument("model dimensions must be positive".into()));
        }
        if self.num_classes != ProtocolLabel::COUNT {
            return Err(Error::InvalidArgument(format!(
                "classifier must have {} classes",
                ProtocolLabel::COUNT
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument("dropout must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Width of one layer's output, forward and backward halves concatenated.
    pub fn output_size(&self) -> usize {
        2 * self.hidden_size
    }

    pub fn layer_input_size(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_size
        } else {
            self.output_size()
        }
    }
}

/// One direction of one GRU layer. Gate blocks are stacked in the order
/// update (z), reset (r), candidate (n), each `hidden` rows tall.
#[derive(Debug, Clone, PartialEq)]
pub struct GruDirectionParams {
    pub w_input: Matrix,
    pub w_hidden: Matrix,
    pub bias: Vec<f64>,
}

impl GruDirectionParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_input: Matrix::zeros(3 * hidden, input),
            w_hidden: Matrix::zeros(3 * hidden, hidden),
            bias: vec![0.0; 3 * hidden],
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_hidden.cols
    }

    pub fn input_size(&self) -> usize {
        self.w_input.cols
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GruLayerParams {
    pub forward: GruDirectionParams,
    pub backward: GruDirectionParams,
}

/// Additive attention: `score_t = v · tanh(W a_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub projection: Matrix,
    pub score: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Every trainable tensor. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub layers: Vec<GruLayerParams>,
    pub attention: AttentionParams,
    pub head: HeadParams,
}

impl ModelParams {
    pub fn zeros(config: ModelConfig) -> Self {
        let h = config.hidden_size;
        let layers = (0..config.num_layers)
            .map(|l| {
                let input = config.layer_input_size(l);
                GruLayerParams {
                    forward: GruDirectionParams::zeros(input, h),
                    backward: GruDirectionParams::zeros(input, h),
                }
            })
            .collect();
        Self {
            config,
            layers,
            attention: AttentionParams {
                projection: Matrix::zeros(config.attention_dim, config.output_size()),
                score: vec![0.0; config.attention_dim],
            },
            head: HeadParams {
                weight: Matrix::zeros(config.num_classes, config.output_size()),
                bias: vec![0.0; config.num_classes],
            },
        }
    }

    /// Weights uniform in ±1/√hidden, biases zero, head per `head_init`.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut params = Self::zeros(config);
        let bound = 1.0 / (config.hidden_size as f64).sqrt();
        let mut rng = seed::rng(seed::derive(seed, &[stream::INIT]));
        let zero_head = config.head_init == HeadInit::Zero;
        for (name, tensor) in params.tensors_mut() {
            let is_bias = name.ends_with("bias");
            let is_head = name.starts_with("head.");
            if is_bias || (is_head && zero_head) {
                continue;
            }
            for v in tensor.iter_mut() {
                *v = rng.gen_range(-bound..bound);
            }
        }
        Ok(params)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.config)
    }

    /// Named views of every tensor in canonical order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (dir, p) in [("fwd", &layer.forward), ("bwd", &layer.backward)] {
                out.push((format!("gru.{l}.{dir}.w_input"), &p.w_input.data));
                out.push((format!("gru.{l}.{dir}.w_hidden"), &p.w_hidden.data));
                out.push((format!("gru.{l}.{dir}.bias"), &p.bias));
            }
        }
        out.push(("attention.projection".into(), &self.attention.projection.data));
        out.push(("attention.score".into(), &self.attention.score));
        out.push(("head.weight".into(), &self.head.weight.data));
        out.push(("head.bias".into(), &self.head.bias));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (dir, p) in [("fwd", &mut layer.forward), ("bwd", &mut layer.backward)] {
                out.push((format!("gru.{l}.{dir}.w_input"), &mut p.w_input.data));
                out.push((format!("gru.{l}.{dir}.w_hidden"), &mut p.w_hidden.data));
                out.push((format!("gru.{l}.{dir}.bias"), &mut p.bias));
            }
        }
        out.push(("attention.projection".into(), &mut self.attention.projection.data));
        out.push(("attention.score".into(), &mut self.attention.score));
        out.push(("head.weight".into(), &mut self.head.weight.data));
        out.push(("head.bias".into(), &mut self.head.bias));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn add_assign(&mut self, other: &ModelParams) {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, t) in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// First tensor holding a NaN or infinity, if any.
    pub fn first_non_finite(&self) -> Option<String> {
        self.tensors()
            .into_iter()
            .find(|(_, t)| t.iter().any(|v| !v.is_finite()))
            .map(|(name, _)| name)
    }
}
