use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Result};
use ccid_core::train::read_metrics_csv;
use ccid_core::ProtocolLabel;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::dataset::read_traces;
use crate::manifest::{beside, RunManifest};
use crate::output::Outputs;
use crate::svg::{render, Panel, Series, PALETTE};

pub const NAME: &str = "plot";

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["loss", "traces"]))]
pub struct PlotArgs {
    /// Metrics CSV to draw as train/validation loss on a log scale.
    #[arg(long)]
    pub loss: Option<PathBuf>,
    /// Trace directory to draw as size and RTT panels per protocol.
    #[arg(long)]
    pub traces: Option<PathBuf>,
    /// SVG file to write [default: <out-root>/loss.svg or <out-root>/traces.svg].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl PlotArgs {
    pub fn resolve(mut self, root: &Path) -> Self {
        let name = if self.loss.is_some() { "loss.svg" } else { "traces.svg" };
        self.out.get_or_insert_with(|| root.join(name));
        self
    }
}

fn loss_panels(path: &Path) -> Result<Vec<Panel>> {
    let metrics = read_metrics_csv(path)?;
    if metrics.is_empty() {
        bail!("{} holds no epochs", path.display());
    }
    if metrics.iter().any(|m| !(m.train_loss > 0.0 && m.val_loss > 0.0)) {
        bail!("{} has nonpositive losses, which a log axis cannot show", path.display());
    }
    let series = |name: &str, color, f: fn(&ccid_core::train::EpochMetrics) -> f64| Series {
        name: name.into(),
        points: metrics.iter().map(|m| (m.epoch as f64, f(m))).collect(),
        color,
    };
    Ok(vec![Panel {
        title: "Training and validation loss".into(),
        x_label: "epoch".into(),
        y_label: "cross-entropy loss (log scale)".into(),
        log_y: true,
        y_range: None,
        series: vec![
            series("train", PALETTE[0], |m| m.train_loss),
            series("validation", PALETTE[1], |m| m.val_loss),
        ],
    }])
}

/// Two panels per protocol (size per interval, RTT per interval) for the
/// first trace of each protocol, BBR first. Size panels share one y range,
/// as do RTT panels.
fn trace_panels(dir: &Path) -> Result<Vec<Panel>> {
    let traces = read_traces(dir)?;
    let order = [ProtocolLabel::Bbr, ProtocolLabel::Cubic, ProtocolLabel::Reno, ProtocolLabel::Vegas];
    let chosen: Vec<_> = order
        .iter()
        .filter_map(|&l| traces.iter().find(|(_, t)| t.label == l).map(|(_, t)| t))
        .collect();
    let range = |f: &dyn Fn(&ccid_core::trace::FeatureRecord) -> f64| {
        let vals = chosen.iter().flat_map(|t| t.records.iter().map(f));
        let hi = vals.fold(0.0f64, f64::max);
        (0.0, if hi > 0.0 { hi * 1.05 } else { 1.0 })
    };
    let size_range = range(&|r| r.size_bytes as f64 / 1e6);
    let rtt_range = range(&|r| r.rtt_ms);
    let mut panels = Vec::new();
    for t in chosen {
        let color = PALETTE[t.label.index()];
        let name = t.label.display_name();
        let points = |f: fn(&ccid_core::trace::FeatureRecord) -> f64| {
            t.records.iter().map(|r| (r.time_s, f(r))).collect()
        };
        panels.push(Panel {
            title: format!("{name}: size per interval"),
            x_label: "time (s)".into(),
            y_label: "size (MB)".into(),
            log_y: false,
            y_range: Some(size_range),
            series: vec![Series {
                name: name.into(),
                points: points(|r| r.size_bytes as f64 / 1e6),
                color,
            }],
        });
        panels.push(Panel {
            title: format!("{name}: RTT per interval"),
            x_label: "time (s)".into(),
            y_label: "RTT (ms)".into(),
            log_y: false,
            y_range: Some(rtt_range),
            series: vec![Series {
                name: name.into(),
                points: points(|r| r.rtt_ms),
                color,
            }],
        });
    }
    Ok(panels)
}

pub fn run(args: PlotArgs) -> Result<()> {
    let started = Instant::now();
    let out = args.out.clone().expect("resolved");
    let (panels, input) = match (&args.loss, &args.traces) {
        (Some(loss), _) => (loss_panels(loss)?, loss.clone()),
        (None, Some(dir)) => (trace_panels(dir)?, dir.clone()),
        (None, None) => bail!("pass --loss or --traces"),
    };
    let svg = render(&panels, if args.loss.is_some() { 1 } else { 2 });
    let mut outputs = Outputs::default();
    let path = outputs.file(&out)?;
    std::fs::write(&path, svg)?;
    let mut manifest = RunManifest::new(NAME, &args)?;
    manifest.inputs.push(input);
    manifest.write(&beside(&out), &mut outputs, started)?;
    outputs.commit();
    println!("wrote {}", out.display());
    Ok(())
}
