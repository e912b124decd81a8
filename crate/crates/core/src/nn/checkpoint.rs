//! Checkpoint container.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic          8 bytes  "CCIDCKPT"
//! version        u32      1
//! input_size     u32
//! hidden_size    u32
//! num_layers     u32
//! attention_dim  u32
//! num_classes    u32
//! dropout        f64
//! head_init      u8       0 = zero, 1 = uniform
//! seq_len        u32
//! n_features     u32
//! mean, std      n_features × f64 each
//! seed           u64
//! epochs         u64      completed training epochs
//! n_tensors      u32
//! tensor         name (u32 byte length + UTF-8), len u64, len × f64
//! resume flag    u8       1 if optimizer state follows
//!   t            u64
//!   lr           f64
//!   best         f64      scheduler best validation loss
//!   stalled      u64
//!   best_val     f64      best validation loss seen by the trainer
//!   m, v         every tensor again, same order, len × f64 each
//! ```
//!
//! Tensors are stored in the order of `ModelParams::tensors`; matrices are
//! row-major with gate blocks z, r, n.

use std::fs;
use std::path::Path;

use super::params::{HeadInit, ModelConfig, ModelParams};
use crate::binio::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::features::{Normalization, N_FEATURES};
use crate::train::{OptimizerState, PlateauState};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"CCIDCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Optimizer and scheduler state needed to continue a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResumeState {
    pub optimizer: OptimizerState,
    pub scheduler: PlateauState,
    pub best_val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub seq_len: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub epochs: usize,
    pub resume: Option<ResumeState>,
}

impl Checkpoint {
    pub fn config(&self) -> ModelConfig {
        self.params.config
    }

    /// Errors unless the checkpoint was built with `expected`.
    pub fn check_config(&self, expected: &ModelConfig) -> Result<()> {
        if self.params.config != *expected {
            return Err(Error::Shape(format!(
                "checkpoint config {:?} does not match {:?}",
                self.params.config, expected
            )));
        }
        Ok(())
    }

    /// Errors unless samples of `seq_len × n_features` fit this model.
    pub fn check_input(&self, seq_len: usize, n_features: usize) -> Result<()> {
        if n_features != self.params.config.input_size {
            return Err(Error::Shape(format!(
                "model takes {} features, data has {n_features}",
                self.params.config.input_size
            )));
        }
        if seq_len != self.seq_len {
            return Err(Error::Shape(format!(
                "model was trained on sequences of {}, data has {seq_len}",
                self.seq_len
            )));
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let cfg = self.params.config;
        let mut w = ByteWriter::default();
        w.bytes(CHECKPOINT_MAGIC);
        w.u32(CHECKPOINT_VERSION);
        for d in [cfg.input_size, cfg.hidden_size, cfg.num_layers, cfg.attention_dim, cfg.num_classes] {
            w.u32(d as u32);
        }
        w.f64(cfg.dropout);
        w.u8(match cfg.head_init {
            HeadInit::Zero => 0,
            HeadInit::Uniform => 1,
        });
        w.u32(self.seq_len as u32);
        w.u32(N_FEATURES as u32);
        w.f64s(&self.normalization.mean);
        w.f64s(&self.normalization.std);
        w.u64(self.seed);
        w.u64(self.epochs as u64);
        let tensors = self.params.tensors();
        w.u32(tensors.len() as u32);
        for (name, t) in &tensors {
            w.str(name);
            w.len_u64(t.len());
            w.f64s(t);
        }
        match &self.resume {
            None => w.u8(0),
            Some(r) => {
                w.u8(1);
                w.u64(r.optimizer.t);
                w.f64(r.optimizer.lr);
                w.f64(r.scheduler.best);
                w.u64(r.scheduler.stalled_epochs as u64);
                w.f64(r.best_val_loss);
                for moments in [&r.optimizer.m, &r.optimizer.v] {
                    for (_, t) in moments.tensors() {
                        w.f64s(t);
                    }
                }
            }
        }
        w.buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        if r.take(8).ok() != Some(CHECKPOINT_MAGIC.as_slice()) {
            return Err(Error::Format("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {version}")));
        }
        let mut dims = [0usize; 5];
        for d in &mut dims {
            *d = r.u32()? as usize;
        }
        let dropout = r.f64()?;
        let head_init = match r.u8()? {
            0 => HeadInit::Zero,
            1 => HeadInit::Uniform,
            other => return Err(Error::Format(format!("unknown head init {other}"))),
        };
        let config = ModelConfig {
            input_size: dims[0],
            hidden_size: dims[1],
            num_layers: dims[2],
            attention_dim: dims[3],
            num_classes: dims[4],
            dropout,
            head_init,
        };
        config
            .validate()
            .map_err(|e| Error::Format(format!("checkpoint config: {e}")))?;
        let seq_len = r.u32()? as usize;
        let n_features = r.u32()? as usize;
        if n_features != N_FEATURES {
            return Err(Error::Format(format!("expected {N_FEATURES} features, found {n_features}")));
        }
        let mut normalization = Normalization::identity();
        normalization.mean.copy_from_slice(&r.f64s(N_FEATURES)?);
        normalization.std.copy_from_slice(&r.f64s(N_FEATURES)?);
        let seed = r.u64()?;
        let epochs = r.u64()? as usize;

        let mut params = ModelParams::zeros(config);
        let count = r.u32()? as usize;
        let expected = params.tensors().len();
        if count != expected {
            return Err(Error::Format(format!("expected {expected} tensors, found {count}")));
        }
        for (name, t) in params.tensors_mut() {
            let stored = r.str()?;
            if stored != name {
                return Err(Error::Format(format!("expected tensor {name}, found {stored}")));
            }
            let len = r.len_u64()?;
            if len != t.len() {
                return Err(Error::Format(format!("tensor {name} holds {len} values, expected {}", t.len())));
            }
            t.copy_from_slice(&r.f64s(len)?);
        }
        let resume = match r.u8()? {
            0 => None,
            1 => {
                let t = r.u64()?;
                let lr = r.f64()?;
                let best = r.f64()?;
                let stalled_epochs = r.u64()? as usize;
                let best_val_loss = r.f64()?;
                let mut optimizer = OptimizerState::new(&params, lr);
                optimizer.t = t;
                for moments in [&mut optimizer.m, &mut optimizer.v] {
                    for (_, dst) in moments.tensors_mut() {
                        let n = dst.len();
                        dst.copy_from_slice(&r.f64s(n)?);
                    }
                }
                Some(ResumeState {
                    optimizer,
                    scheduler: PlateauState {
                        best,
                        stalled_epochs,
                    },
                    best_val_loss,
                })
            }
            other => return Err(Error::Format(format!("bad resume flag {other}"))),
        };
        r.expect_end()?;
        Ok(Self {
            params,
            seq_len,
            normalization,
            seed,
            epochs,
            resume,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::decode(&bytes)
    }

    /// Reads a checkpoint and checks it against `expected`.
    pub fn read_expecting(path: &Path, expected: &ModelConfig) -> Result<Self> {
        let ckpt = Self::read(path)?;
        ckpt.check_config(expected)?;
        Ok(ckpt)
    }
}
