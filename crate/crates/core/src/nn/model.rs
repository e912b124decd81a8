use rand::Rng;
use rayon::prelude::*;

use super::gru::{gru_step, gru_step_backward, GruStep};
use super::matrix::{dot, log_softmax_at, softmax};
use super::params::{GruDirectionParams, ModelParams};
use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::seed::{self, stream};

/// One direction's pass over the sequence, in processing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionTrace {
    pub steps: Vec<GruStep>,
}

impl DirectionTrace {
    fn h_prev(&self, k: usize, hidden: usize) -> Vec<f64> {
        if k == 0 {
            vec![0.0; hidden]
        } else {
            self.steps[k - 1].h.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    /// Layer input per time step, after dropout.
    pub input: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers applied to `input`; `None` when inactive.
    pub dropout_mask: Option<Vec<Vec<f64>>>,
    pub forward: DirectionTrace,
    /// Runs from the last time step to the first.
    pub backward: DirectionTrace,
    /// `[h_fwd_t ; h_bwd_t]` per time step.
    pub output: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionTrace {
    /// `tanh(W a_t)` per step.
    pub projected: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub layers: Vec<LayerTrace>,
    pub attention: AttentionTrace,
    pub logits: Vec<f64>,
}

fn split_rows(params: &ModelParams, input: &[f64]) -> Result<Vec<Vec<f64>>> {
    let width = params.config.input_size;
    if input.is_empty() || !input.len().is_multiple_of(width) {
        return Err(Error::Shape(format!(
            "sample of {} values is not a nonempty sequence of {width}-feature rows",
            input.len()
        )));
    }
    Ok(input.chunks(width).map(<[f64]>::to_vec).collect())
}

fn run_direction(
    p: &GruDirectionParams,
    inputs: &[Vec<f64>],
    reverse: bool,
    layer: usize,
) -> Result<DirectionTrace> {
    let hidden = p.hidden_size();
    let len = inputs.len();
    let mut steps: Vec<GruStep> = Vec::with_capacity(len);
    for k in 0..len {
        let t = if reverse { len - 1 - k } else { k };
        let zero = vec![0.0; hidden];
        let h_prev = steps.last().map_or(&zero, |s| &s.h);
        let step = gru_step(p, &inputs[t], h_prev);
        if step.h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteActivation {
                layer,
                direction: if reverse { "backward" } else { "forward" },
                step: t,
            });
        }
        steps.push(step);
    }
    Ok(DirectionTrace { steps })
}

/// Runs the network on one row-major `seq_len × input_size` sample.
/// Dropout is applied only when `training` is set, with masks drawn from
/// `dropout_seed`.
pub fn forward(
    params: &ModelParams,
    input: &[f64],
    training: bool,
    dropout_seed: u64,
) -> Result<(Vec<f64>, ForwardTrace)> {
    let cfg = params.config;
    let hidden = cfg.hidden_size;
    let mut current = split_rows(params, input)?;
    let len = current.len();
    let mut layers = Vec::with_capacity(cfg.num_layers);

    for (l, layer) in params.layers.iter().enumerate() {
        let mut dropout_mask = None;
        if l > 0 && training && cfg.dropout > 0.0 {
            let keep = 1.0 - cfg.dropout;
            let mut rng = seed::rng(seed::derive(dropout_seed, &[stream::DROPOUT, l as u64]));
            let mask: Vec<Vec<f64>> = current
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect()
                })
                .collect();
            for (row, m) in current.iter_mut().zip(&mask) {
                for (v, k) in row.iter_mut().zip(m) {
                    *v *= k;
                }
            }
            dropout_mask = Some(mask);
        }
        let fwd = run_direction(&layer.forward, &current, false, l)?;
        let bwd = run_direction(&layer.backward, &current, true, l)?;
        let output: Vec<Vec<f64>> = (0..len)
            .map(|t| {
                let mut row = Vec::with_capacity(2 * hidden);
                row.extend_from_slice(&fwd.steps[t].h);
                row.extend_from_slice(&bwd.steps[len - 1 - t].h);
                row
            })
            .collect();
        let next = output.clone();
        layers.push(LayerTrace {
            input: std::mem::replace(&mut current, next),
            dropout_mask,
            forward: fwd,
            backward: bwd,
            output,
        });
    }

    let att = &params.attention;
    let projected: Vec<Vec<f64>> = current
        .iter()
        .map(|a| {
            let mut u = vec![0.0; cfg.attention_dim];
            att.projection.mul_vec_add(a, &mut u);
            u.iter_mut().for_each(|v| *v = v.tanh());
            u
        })
        .collect();
    let scores: Vec<f64> = projected.iter().map(|u| dot(&att.score, u)).collect();
    let weights = softmax(&scores);
    let mut context = vec![0.0; cfg.output_size()];
    for (a, &w) in current.iter().zip(&weights) {
        for (c, v) in context.iter_mut().zip(a) {
            *c += w * v;
        }
    }
    let mut logits = params.head.bias.clone();
    params.head.weight.mul_vec_add(&context, &mut logits);
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteTensor("logits".into()));
    }
    let trace = ForwardTrace {
        layers,
        attention: AttentionTrace {
            projected,
            scores,
            weights,
            context,
        },
        logits: logits.clone(),
    };
    Ok((logits, trace))
}

#[allow(clippy::too_many_arguments)]
fn backward_direction(
    p: &GruDirectionParams,
    grad: &mut GruDirectionParams,
    trace: &DirectionTrace,
    inputs: &[Vec<f64>],
    d_out: &[Vec<f64>],
    offset: usize,
    reverse: bool,
    d_in: &mut [Vec<f64>],
) {
    let hidden = p.hidden_size();
    let len = inputs.len();
    let mut dh = vec![0.0; hidden];
    for k in (0..len).rev() {
        let t = if reverse { len - 1 - k } else { k };
        for (d, g) in dh.iter_mut().zip(&d_out[t][offset..offset + hidden]) {
            *d += g;
        }
        let h_prev = trace.h_prev(k, hidden);
        dh = gru_step_backward(p, grad, &inputs[t], &h_prev, &trace.steps[k], &dh, &mut d_in[t]);
    }
}

/// Gradient of `loss` w.r.t. every parameter, given `d_logits`.
fn backward(params: &ModelParams, trace: &ForwardTrace, d_logits: &[f64]) -> ModelParams {
    let cfg = params.config;
    let hidden = cfg.hidden_size;
    let mut grad = params.zeros_like();
    let att = &trace.attention;
    let top = &trace.layers[trace.layers.len() - 1].output;

    grad.head.weight.add_outer(d_logits, &att.context);
    grad.head.bias.copy_from_slice(d_logits);
    let mut d_context = vec![0.0; cfg.output_size()];
    params.head.weight.t_mul_vec_add(d_logits, &mut d_context);

    let d_weights: Vec<f64> = top.iter().map(|a| dot(&d_context, a)).collect();
    let mean = dot(&att.weights, &d_weights);
    let mut d_out: Vec<Vec<f64>> = top
        .iter()
        .zip(&att.weights)
        .map(|(_, &w)| d_context.iter().map(|d| w * d).collect())
        .collect();
    for t in 0..top.len() {
        let d_score = att.weights[t] * (d_weights[t] - mean);
        let u = &att.projected[t];
        for (g, ui) in grad.attention.score.iter_mut().zip(u) {
            *g += d_score * ui;
        }
        let d_pre: Vec<f64> = params
            .attention
            .score
            .iter()
            .zip(u)
            .map(|(v, ui)| d_score * v * (1.0 - ui * ui))
            .collect();
        grad.attention.projection.add_outer(&d_pre, &top[t]);
        params.attention.projection.t_mul_vec_add(&d_pre, &mut d_out[t]);
    }

    for l in (0..params.layers.len()).rev() {
        let lt = &trace.layers[l];
        let width = cfg.layer_input_size(l);
        let mut d_in = vec![vec![0.0; width]; lt.input.len()];
        let (p, g) = (&params.layers[l], &mut grad.layers[l]);
        backward_direction(&p.forward, &mut g.forward, &lt.forward, &lt.input, &d_out, 0, false, &mut d_in);
        backward_direction(&p.backward, &mut g.backward, &lt.backward, &lt.input, &d_out, hidden, true, &mut d_in);
        if let Some(mask) = &lt.dropout_mask {
            for (row, m) in d_in.iter_mut().zip(mask) {
                for (d, k) in row.iter_mut().zip(m) {
                    *d *= k;
                }
            }
        }
        d_out = d_in;
    }
    grad
}

/// Cross-entropy of one sample and its gradient.
pub fn sample_loss_and_grads(
    params: &ModelParams,
    input: &[f64],
    label: usize,
    training: bool,
    dropout_seed: u64,
) -> Result<(f64, ModelParams)> {
    if label >= params.config.num_classes {
        return Err(Error::LabelOutOfRange(label));
    }
    let (logits, trace) = forward(params, input, training, dropout_seed)?;
    let loss = -log_softmax_at(&logits, label);
    let mut d_logits = softmax(&logits);
    d_logits[label] -= 1.0;
    Ok((loss, backward(params, &trace, &d_logits)))
}

/// Mean cross-entropy over `batch` of `(sample, label)` pairs and its exact
/// gradient. Sample `i` draws dropout masks from `derive(seed, [i])`.
/// Samples run in parallel; the sum is taken in batch order.
pub fn loss_and_grads(
    params: &ModelParams,
    batch: &[(&[f64], usize)],
    training: bool,
    seed: u64,
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if let Some(&(_, label)) = batch.iter().find(|(_, l)| *l >= params.config.num_classes) {
        return Err(Error::LabelOutOfRange(label));
    }
    let per_sample: Vec<(f64, ModelParams)> = batch
        .par_iter()
        .enumerate()
        .map(|(i, &(input, label))| {
            sample_loss_and_grads(params, input, label, training, seed::derive(seed, &[i as u64]))
        })
        .collect::<Result<_>>()?;
    let mut iter = per_sample.into_iter();
    let (mut loss, mut grads) = iter.next().expect("nonempty batch");
    for (l, g) in iter {
        loss += l;
        grads.add_assign(&g);
    }
    let scale = 1.0 / batch.len() as f64;
    grads.scale(scale);
    Ok((loss * scale, grads))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Evaluation-mode class probabilities and the most likely label.
pub fn predict(params: &ModelParams, input: &[f64]) -> Result<(ProtocolLabel, [f64; ProtocolLabel::COUNT])> {
    let (logits, _) = forward(params, input, false, 0)?;
    let probs = softmax(&logits);
    let mut out = [0.0; ProtocolLabel::COUNT];
    out.copy_from_slice(&probs);
    let label = ProtocolLabel::from_index(argmax(&probs))?;
    Ok((label, out))
}
