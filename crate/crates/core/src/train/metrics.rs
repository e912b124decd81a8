use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 6] = ["epoch", "train_loss", "val_loss", "train_acc", "val_acc", "lr"];

/// Evaluation-mode metrics after one epoch; `lr` is the rate chosen by the
/// scheduler for the following epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub lr: f64,
}

impl EpochMetrics {
    fn to_record(self) -> [String; 6] {
        [
            self.epoch.to_string(),
            self.train_loss.to_string(),
            self.val_loss.to_string(),
            self.train_acc.to_string(),
            self.val_acc.to_string(),
            self.lr.to_string(),
        ]
    }
}

/// Appends one CSV row per epoch, flushing after each.
pub struct MetricsWriter {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(file),
        };
        w.write(&METRICS_HEADER)?;
        Ok(w)
    }

    fn write<T: AsRef<[u8]>>(&mut self, record: &[T]) -> Result<()> {
        let ctx = || format!("writing {}", self.path.display());
        self.writer
            .write_record(record)
            .map_err(|e| Error::io(ctx(), e.into()))?;
        self.writer.flush().map_err(|e| Error::io(ctx(), e))
    }

    pub fn append(&mut self, m: &EpochMetrics) -> Result<()> {
        self.write(&m.to_record())
    }
}

pub fn metrics_to_csv(metrics: &[EpochMetrics]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).expect("in-memory write");
    for m in metrics {
        w.write_record(m.to_record()).expect("in-memory write");
    }
    let mut bytes = w.into_inner().expect("in-memory flush");
    bytes.flush().expect("in-memory flush");
    String::from_utf8(bytes).expect("ASCII output")
}

/// Parses a metrics CSV; columns are matched by name.
pub fn parse_metrics_csv(text: &str, path: &Path) -> Result<Vec<EpochMetrics>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let mut columns = [0usize; 6];
    let missing: Vec<&str> = METRICS_HEADER
        .iter()
        .zip(columns.iter_mut())
        .filter_map(|(name, slot)| match headers.iter().position(|h| h == *name) {
            Some(i) => {
                *slot = i;
                None
            }
            None => Some(*name),
        })
        .collect();
    if !missing.is_empty() {
        return Err(parse_err(1, format!("missing column(s): {}", missing.join(", "))));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        let field = |c: usize| -> Result<&str> {
            record
                .get(columns[c])
                .ok_or_else(|| parse_err(line, format!("missing {}", METRICS_HEADER[c])))
        };
        let num = |c: usize| -> Result<f64> {
            let s = field(c)?;
            s.parse()
                .map_err(|_| parse_err(line, format!("bad {} value {s:?}", METRICS_HEADER[c])))
        };
        let epoch = field(0)?
            .parse()
            .map_err(|_| parse_err(line, "bad epoch".into()))?;
        out.push(EpochMetrics {
            epoch,
            train_loss: num(1)?,
            val_loss: num(2)?,
            train_acc: num(3)?,
            val_acc: num(4)?,
            lr: num(5)?,
        });
    }
    Ok(out)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<EpochMetrics>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_metrics_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_streaming() {
        let rows = vec![
            EpochMetrics {
                epoch: 1,
                train_loss: 1.2345678901234,
                val_loss: 1.3,
                train_acc: 0.5,
                val_acc: 0.25,
                lr: 7.5e-5,
            },
            EpochMetrics {
                epoch: 2,
                train_loss: 0.1,
                val_loss: 0.2,
                train_acc: 1.0,
                val_acc: 0.875,
                lr: 3.75e-5,
            },
        ];
        let text = metrics_to_csv(&rows);
        assert!(text.starts_with("epoch,train_loss,val_loss,train_acc,val_acc,lr\n"));
        assert_eq!(parse_metrics_csv(&text, Path::new("m.csv")).unwrap(), rows);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        let mut w = MetricsWriter::create(&path).unwrap();
        for r in &rows {
            w.append(r).unwrap();
        }
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
        assert_eq!(read_metrics_csv(&path).unwrap(), rows);
    }

    #[test]
    fn missing_columns_are_named() {
        let err = parse_metrics_csv("epoch,train_loss,lr\n1,0.5,0.1\n", Path::new("m.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("val_loss") && msg.contains("val_acc"), "{msg}");
        let err = parse_metrics_csv(&format!("{}\n1,x,1,1,1,1\n", METRICS_HEADER.join(",")), Path::new("m.csv"))
            .unwrap_err();
        assert!(err.to_string().starts_with("m.csv:2:"), "{err}");
    }
}
