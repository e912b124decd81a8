use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use ccid_core::seed::{self, stream};
use ccid_core::sim::{simulate_flow, LinkConfig};
use ccid_core::trace::FlowTrace;
use ccid_core::ProtocolLabel;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;
use crate::output::Outputs;
use crate::units::{flow_timestamp, parse_bytes};

pub const NAME: &str = "simulate";

fn parse_protocol(s: &str) -> Result<String, String> {
    let s = s.trim().to_ascii_lowercase();
    if s == "all" {
        return Ok(s);
    }
    s.parse::<ProtocolLabel>()
        .map(|l| l.as_str().to_string())
        .map_err(|_| format!("unknown protocol {s:?}; valid names: all, vegas, reno, cubic, bbr"))
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Protocols to simulate, comma-separated, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all", value_parser = parse_protocol)]
    pub protocols: Vec<String>,
    /// Flows per protocol.
    #[arg(long, default_value_t = 50)]
    pub flows: u64,
    /// Bytes per flow; K, M, G suffixes are decimal.
    #[arg(long, default_value = "500M", value_parser = parse_bytes)]
    pub bytes: u64,
    /// Master seed; flow seeds are derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory [default: <out-root>/traces].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sample interval in seconds.
    #[arg(long, default_value_t = 0.1)]
    pub interval: f64,
    /// Bottleneck capacity in bits per second.
    #[arg(long, default_value_t = 1e9)]
    pub capacity_bps: f64,
    /// Two-way propagation delay in milliseconds.
    #[arg(long, default_value_t = 0.09)]
    pub base_rtt_ms: f64,
    /// Droptail buffer in packets.
    #[arg(long, default_value_t = ccid_core::sim::link::DEFAULT_BUFFER_PKTS)]
    pub buffer_pkts: u32,
    #[arg(long, default_value_t = 1460)]
    pub mss: u32,
    /// Random per-packet loss probability.
    #[arg(long, default_value_t = 0.0)]
    pub loss_rate: f64,
    /// Per-flow jitter half-width on capacity and base RTT.
    #[arg(long, default_value_t = 0.05)]
    pub jitter: f64,
    /// Mean extra per-round delay in microseconds.
    #[arg(long, default_value_t = ccid_core::sim::link::DEFAULT_DELAY_NOISE_S * 1e6)]
    pub delay_noise_us: f64,
    /// Simulated seconds after which an unfinished flow is cut off.
    #[arg(long, default_value_t = 600.0)]
    pub max_duration_s: f64,
}

impl SimulateArgs {
    pub fn resolve(mut self, root: &Path) -> Self {
        self.out.get_or_insert_with(|| root.join("traces"));
        self
    }

    fn labels(&self) -> Vec<ProtocolLabel> {
        let mut out: Vec<ProtocolLabel> = if self.protocols.iter().any(|p| p == "all") {
            ProtocolLabel::ALL.to_vec()
        } else {
            self.protocols.iter().filter_map(|p| p.parse().ok()).collect()
        };
        out.sort();
        out.dedup();
        out
    }

    fn link(&self, seed: u64) -> LinkConfig {
        LinkConfig {
            capacity_bits_per_s: self.capacity_bps,
            base_rtt_s: self.base_rtt_ms * 1e-3,
            buffer_pkts: self.buffer_pkts,
            mss_bytes: self.mss,
            seed,
            random_loss_rate: self.loss_rate,
            jitter: self.jitter,
            delay_noise_s: self.delay_noise_us * 1e-6,
            max_duration_s: self.max_duration_s,
        }
    }
}

/// Seed of flow `index` of `label` under `master`.
pub fn flow_seed(master: u64, label: ProtocolLabel, index: u64) -> u64 {
    seed::derive(master, &[stream::FLOW, label.index() as u64, index])
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let out_dir = args.out.clone().expect("resolved");
    args.link(0).validate()?;
    let labels = args.labels();
    let jobs: Vec<(ProtocolLabel, u64)> = labels
        .iter()
        .flat_map(|&l| (0..args.flows).map(move |i| (l, i)))
        .collect();
    let traces: Vec<(String, FlowTrace)> = jobs
        .par_iter()
        .map(|&(label, i)| {
            let seed = flow_seed(args.seed, label, i);
            let trace = simulate_flow(label, &args.link(seed), args.bytes, args.interval)?;
            let name = FlowTrace::file_name(label, seed, &flow_timestamp(label.index(), i));
            Ok((name, trace))
        })
        .collect::<Result<_>>()?;

    let mut outputs = Outputs::default();
    outputs.ensure_dir(&out_dir)?;
    let mut incomplete = 0;
    for (name, trace) in &traces {
        let path = outputs.file(&out_dir.join(name))?;
        trace.write_csv(&path)?;
        incomplete += usize::from(!trace.completed);
    }
    let mut manifest = RunManifest::new(NAME, &args)?;
    manifest.seed("master", args.seed);
    manifest.write(&out_dir.join("manifest.json"), &mut outputs, started)?;
    outputs.commit();
    println!(
        "wrote {} traces ({} per protocol) to {}",
        traces.len(),
        args.flows,
        out_dir.display()
    );
    if incomplete > 0 {
        println!("{incomplete} flows hit the {} s duration cap", args.max_duration_s);
    }
    Ok(())
}
