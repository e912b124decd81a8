//! Flow traces and their CSV representation.
//!
//! A trace file is plain CSV with the header
//! `time,size,Max_Winc,Mbps,Smoothed,rtt_ms`, optionally preceded by `#`
//! comment lines. Files written by this crate start with the version line
//! `# ccid-trace v1` followed by `# key=value` provenance lines; files from
//! other capture tooling may omit every comment line, in which case the label
//! comes from the file name. An empty `Smoothed` cell means "not computed".

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::sim::{LinkConfig, PathParams};

pub const TRACE_MAGIC: &str = "# ccid-trace v1";
pub const TRACE_COLUMNS: [&str; 6] = ["time", "size", "Max_Winc", "Mbps", "Smoothed", "rtt_ms"];

/// One sampling-interval observation of a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRecord {
    pub time_s: f64,
    pub size_bytes: u64,
    pub max_win_bytes: u64,
    pub throughput_mbps: f64,
    pub smoothed_mbps: Option<f64>,
    pub rtt_ms: f64,
}

impl FeatureRecord {
    /// The five model features in column order: size, max window,
    /// throughput, smoothed throughput, RTT. Unset smoothing reads as raw
    /// throughput.
    pub fn features(&self) -> [f64; 5] {
        [
            self.size_bytes as f64,
            self.max_win_bytes as f64,
            self.throughput_mbps,
            self.smoothed_mbps.unwrap_or(self.throughput_mbps),
            self.rtt_ms,
        ]
    }
}

/// Link settings and the jittered path a simulated flow ran on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedPath {
    pub link: LinkConfig,
    pub effective: PathParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub label: ProtocolLabel,
    pub records: Vec<FeatureRecord>,
    pub interval_s: f64,
    /// `None` for traces captured outside the simulator.
    pub path: Option<SimulatedPath>,
    pub transfer_bytes: u64,
    pub completed: bool,
}

impl FlowTrace {
    pub fn total_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.size_bytes).sum()
    }

    pub fn duration_s(&self) -> f64 {
        self.records.len() as f64 * self.interval_s
    }

    /// Canonical file name `<protocol>_<seed>_<timestamp>.csv`.
    pub fn file_name(label: ProtocolLabel, seed: u64, timestamp: &str) -> String {
        format!("{}_{}_{}.csv", label.as_str(), seed, timestamp)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(TRACE_MAGIC);
        out.push('\n');
        let mut meta = |key: &str, value: String| {
            let _ = writeln!(out, "# {key}={value}");
        };
        meta("label", self.label.to_string());
        meta("interval_s", self.interval_s.to_string());
        meta("transfer_bytes", self.transfer_bytes.to_string());
        meta("completed", self.completed.to_string());
        if let Some(p) = &self.path {
            let l = &p.link;
            meta("link.capacity_bits_per_s", l.capacity_bits_per_s.to_string());
            meta("link.base_rtt_s", l.base_rtt_s.to_string());
            meta("link.buffer_pkts", l.buffer_pkts.to_string());
            meta("link.mss_bytes", l.mss_bytes.to_string());
            meta("link.seed", l.seed.to_string());
            meta("link.random_loss_rate", l.random_loss_rate.to_string());
            meta("link.jitter", l.jitter.to_string());
            meta("link.delay_noise_s", l.delay_noise_s.to_string());
            meta("link.max_duration_s", l.max_duration_s.to_string());
            meta("path.capacity_bits_per_s", p.effective.capacity_bits_per_s.to_string());
            meta("path.base_rtt_s", p.effective.base_rtt_s.to_string());
        }
        out.push_str(&TRACE_COLUMNS.join(","));
        out.push('\n');
        for r in &self.records {
            let smoothed = r.smoothed_mbps.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.time_s, r.size_bytes, r.max_win_bytes, r.throughput_mbps, smoothed, r.rtt_ms
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn read_csv(path: &Path) -> Result<FlowTrace> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        Self::parse_csv(&text, name, path)
    }

    /// Parses trace CSV text; `file_name` supplies the label when the text
    /// carries no `label=` line, `path` is only used in error messages.
    pub fn parse_csv(text: &str, file_name: &str, path: &Path) -> Result<FlowTrace> {
        let parse_err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };

        let mut meta = std::collections::BTreeMap::new();
        let mut comment_lines = 0u64;
        let mut body_offset = 0usize;
        for line in text.split_inclusive('\n') {
            let trimmed = line.trim();
            if !trimmed.starts_with('#') {
                break;
            }
            comment_lines += 1;
            body_offset += line.len();
            if let Some((k, v)) = trimmed.trim_start_matches('#').trim().split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }

        let get = |key: &str| meta.get(key).map(String::as_str);
        fn num<T: std::str::FromStr>(
            v: Option<&str>,
            key: &str,
            err: &dyn Fn(u64, String) -> Error,
        ) -> Result<Option<T>> {
            v.map(|s| s.parse::<T>().map_err(|_| err(1, format!("bad value {s:?} for {key}"))))
                .transpose()
        }

        let label = match get("label") {
            Some(s) => s.parse::<ProtocolLabel>()?,
            None => ProtocolLabel::from_file_name(file_name).ok_or_else(|| {
                parse_err(1, format!("cannot infer protocol from file name {file_name:?}"))
            })?,
        };

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(&text.as_bytes()[body_offset..]);
        let headers = reader
            .headers()
            .map_err(|e| parse_err(comment_lines + 1, e.to_string()))?
            .clone();
        let mut index = [0usize; 6];
        let mut missing = Vec::new();
        for (slot, col) in index.iter_mut().zip(TRACE_COLUMNS) {
            match headers.iter().position(|h| h == col) {
                Some(i) => *slot = i,
                None => missing.push(col),
            }
        }
        if !missing.is_empty() {
            return Err(parse_err(
                comment_lines + 1,
                format!("missing columns: {}", missing.join(", ")),
            ));
        }

        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line()) + comment_lines;
                parse_err(line, e.to_string())
            })?;
            let line = row.position().map_or(0, |p| p.line()) + comment_lines;
            let cell = |i: usize| row.get(index[i]).unwrap_or("");
            let float = |i: usize| -> Result<f64> {
                cell(i)
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("bad {} value {:?}", TRACE_COLUMNS[i], cell(i))))
            };
            let int = |i: usize| -> Result<u64> {
                let s = cell(i);
                s.parse::<u64>()
                    .or_else(|_| {
                        // capture tools sometimes write integral floats
                        s.parse::<f64>()
                            .ok()
                            .filter(|v| *v >= 0.0 && v.fract() == 0.0)
                            .map(|v| v as u64)
                            .ok_or(())
                    })
                    .map_err(|_| parse_err(line, format!("bad {} value {:?}", TRACE_COLUMNS[i], s)))
            };
            let smoothed = if cell(4).is_empty() { None } else { Some(float(4)?) };
            let record = FeatureRecord {
                time_s: float(0)?,
                size_bytes: int(1)?,
                max_win_bytes: int(2)?,
                throughput_mbps: float(3)?,
                smoothed_mbps: smoothed,
                rtt_ms: float(5)?,
            };
            if let Some(prev) = records.last() {
                let prev: &FeatureRecord = prev;
                if record.time_s <= prev.time_s {
                    return Err(parse_err(line, "time column is not strictly increasing".into()));
                }
            }
            records.push(record);
        }

        let interval_s = match num::<f64>(get("interval_s"), "interval_s", &parse_err)? {
            Some(v) => v,
            None if records.len() >= 2 => records[1].time_s - records[0].time_s,
            None => crate::sim::DEFAULT_SAMPLE_INTERVAL_S,
        };
        let total: u64 = records.iter().map(|r| r.size_bytes).sum();
        let transfer_bytes = num::<u64>(get("transfer_bytes"), "transfer_bytes", &parse_err)?.unwrap_or(total);
        let completed = num::<bool>(get("completed"), "completed", &parse_err)?.unwrap_or(true);

        let path_meta = if get("link.capacity_bits_per_s").is_some() {
            let f = |k: &str| -> Result<f64> {
                num::<f64>(get(k), k, &parse_err)?.ok_or_else(|| parse_err(1, format!("missing {k}")))
            };
            let u = |k: &str| -> Result<u64> {
                num::<u64>(get(k), k, &parse_err)?.ok_or_else(|| parse_err(1, format!("missing {k}")))
            };
            let to_u32 = |k: &str| -> Result<u32> {
                u32::try_from(u(k)?).map_err(|_| parse_err(1, format!("{k} out of range")))
            };
            Some(SimulatedPath {
                link: LinkConfig {
                    capacity_bits_per_s: f("link.capacity_bits_per_s")?,
                    base_rtt_s: f("link.base_rtt_s")?,
                    buffer_pkts: to_u32("link.buffer_pkts")?,
                    mss_bytes: to_u32("link.mss_bytes")?,
                    seed: u("link.seed")?,
                    random_loss_rate: f("link.random_loss_rate")?,
                    jitter: f("link.jitter")?,
                    delay_noise_s: f("link.delay_noise_s")?,
                    max_duration_s: f("link.max_duration_s")?,
                },
                effective: PathParams {
                    capacity_bits_per_s: f("path.capacity_bits_per_s")?,
                    base_rtt_s: f("path.base_rtt_s")?,
                },
            })
        } else {
            None
        };

        Ok(FlowTrace {
            label,
            records,
            interval_s,
            path: path_meta,
            transfer_bytes,
            completed,
        })
    }
}
