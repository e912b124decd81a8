use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{SequenceSample, N_FEATURES};
use crate::label::ProtocolLabel;
use crate::nn::{argmax, forward, log_softmax_at, Checkpoint, ModelParams};

const K: usize = ProtocolLabel::COUNT;

/// Accuracy, mean cross-entropy and confusion counts (`confusion[true][pred]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_loss: f64,
    pub confusion: [[u64; K]; K],
}

impl Evaluation {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..K).map(|i| self.confusion[i][i]).sum()
    }

    /// Share of predictions of `class` that were right; `None` if never predicted.
    pub fn precision(&self, class: usize) -> Option<f64> {
        let predicted: u64 = (0..K).map(|i| self.confusion[i][class]).sum();
        (predicted > 0).then(|| self.confusion[class][class] as f64 / predicted as f64)
    }

    /// Share of `class` samples recovered; `None` if the class is absent.
    pub fn recall(&self, class: usize) -> Option<f64> {
        let actual: u64 = self.confusion[class].iter().sum();
        (actual > 0).then(|| self.confusion[class][class] as f64 / actual as f64)
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.2}%", 100.0 * v));
        writeln!(
            f,
            "accuracy: {:.2}% ({}/{})",
            100.0 * self.accuracy,
            self.correct(),
            self.total()
        )?;
        writeln!(f, "mean loss: {:.6}", self.mean_loss)?;
        writeln!(f)?;
        writeln!(f, "{:<12}{:>12}{:>12}", "class", "precision", "recall")?;
        for label in ProtocolLabel::ALL {
            let i = label.index();
            writeln!(f, "{:<12}{:>12}{:>12}", label.as_str(), pct(self.precision(i)), pct(self.recall(i)))?;
        }
        writeln!(f)?;
        write!(f, "{:<12}", "true\\pred")?;
        for label in ProtocolLabel::ALL {
            write!(f, "{:>8}", label.as_str())?;
        }
        writeln!(f)?;
        for label in ProtocolLabel::ALL {
            write!(f, "{:<12}", label.as_str())?;
            for count in self.confusion[label.index()] {
                write!(f, "{count:>8}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Evaluation-mode pass over `samples`. Per-sample work runs in parallel;
/// losses are summed in sample order.
pub fn evaluate(params: &ModelParams, samples: &[SequenceSample]) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate on an empty sample set".into()));
    }
    let outcomes: Vec<(f64, usize, usize)> = samples
        .par_iter()
        .map(|s| {
            let (logits, _) = forward(params, s.flat(), false, 0)?;
            let y = s.label.index();
            Ok((-log_softmax_at(&logits, y), y, argmax(&logits)))
        })
        .collect::<Result<_>>()?;
    let mut confusion = [[0u64; K]; K];
    let mut loss = 0.0;
    for &(l, y, p) in &outcomes {
        loss += l;
        confusion[y][p] += 1;
    }
    let n = samples.len() as f64;
    let correct: u64 = (0..K).map(|i| confusion[i][i]).sum();
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        mean_loss: loss / n,
        confusion,
    })
}

/// [`evaluate`] after checking that the samples fit the checkpoint.
pub fn evaluate_checkpoint(ckpt: &Checkpoint, samples: &[SequenceSample]) -> Result<Evaluation> {
    if let Some(s) = samples.first() {
        ckpt.check_input(s.seq_len(), N_FEATURES)?;
    }
    if let Some(s) = samples.iter().find(|s| s.seq_len() != ckpt.seq_len) {
        return Err(Error::Shape(format!("sample from {} has {} rows", s.source_id, s.seq_len())));
    }
    evaluate(&ckpt.params, samples)
}
