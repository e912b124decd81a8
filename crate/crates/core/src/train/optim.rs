use crate::error::{Error, Result};
use crate::nn::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments, mirroring the parameter tensors, plus the step count and
/// the current learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub t: u64,
    pub lr: f64,
    pub m: ModelParams,
    pub v: ModelParams,
}

impl OptimizerState {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        Self {
            t: 0,
            lr,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }
}

/// One Adam update with bias correction. A non-finite gradient leaves
/// everything untouched and names the offending tensor.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut OptimizerState,
    hyper: AdamHyper,
) -> Result<()> {
    if grads.config != params.config || state.m.config != params.config {
        return Err(Error::Shape("optimizer state does not match the model".into()));
    }
    if let Some(name) = grads.first_non_finite() {
        return Err(Error::NonFiniteTensor(format!("gradient {name}")));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - hyper.beta1.powi(t);
    let c2 = 1.0 - hyper.beta2.powi(t);
    let lr = state.lr;
    let tensors = params
        .tensors_mut()
        .into_iter()
        .zip(grads.tensors())
        .zip(state.m.tensors_mut().into_iter().zip(state.v.tensors_mut()));
    for (((_, p), (_, g)), ((_, m), (_, v))) in tensors {
        for i in 0..p.len() {
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + hyper.epsilon);
        }
    }
    Ok(())
}

/// Reduce-on-plateau bookkeeping in "min" mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauState {
    pub best: f64,
    pub stalled_epochs: usize,
}

impl Default for PlateauState {
    fn default() -> Self {
        Self {
            best: f64::INFINITY,
            stalled_epochs: 0,
        }
    }
}

/// Smallest decrease that counts as an improvement.
pub const PLATEAU_THRESHOLD: f64 = 1e-8;

/// Feeds one validation loss to the scheduler and returns the learning rate
/// for the next epoch. After `patience` consecutive epochs without an
/// improvement the rate is multiplied by `factor` and the count restarts.
pub fn plateau_schedule(state: &mut PlateauState, val_loss: f64, lr: f64, factor: f64, patience: usize) -> f64 {
    if val_loss < state.best - PLATEAU_THRESHOLD {
        state.best = val_loss;
        state.stalled_epochs = 0;
        return lr;
    }
    state.stalled_epochs += 1;
    if state.stalled_epochs >= patience {
        state.stalled_epochs = 0;
        lr * factor
    } else {
        lr
    }
}
