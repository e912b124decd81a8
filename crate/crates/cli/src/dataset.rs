use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use ccid_core::features::{build_dataset, write_dataset, PipelineConfig, SplitRatios, SplitUnit};
use ccid_core::trace::FlowTrace;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::manifest::{beside, RunManifest};
use crate::output::Outputs;

pub const NAME: &str = "build-dataset";

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Windows are assigned to partitions independently.
    Sequence,
    /// All windows of a flow land in the same partition.
    Flow,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct BuildDatasetArgs {
    /// Directory of trace CSVs [default: <out-root>/traces].
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Dataset file to write [default: <out-root>/dataset.bin].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Records per sequence.
    #[arg(long, default_value_t = 60)]
    pub seq_len: usize,
    /// Records between window starts [default: --seq-len, no overlap].
    #[arg(long)]
    pub stride: Option<usize>,
    /// Trailing moving-average window for the Smoothed column.
    #[arg(long, default_value_t = 5)]
    pub smooth_window: usize,
    #[arg(long, default_value_t = 0.7)]
    pub train: f64,
    #[arg(long, default_value_t = 0.1)]
    pub val: f64,
    #[arg(long, default_value_t = 0.2)]
    pub test: f64,
    /// Split seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Unit::Sequence)]
    pub split_unit: Unit,
}

impl BuildDatasetArgs {
    pub fn resolve(mut self, root: &Path) -> Self {
        self.input.get_or_insert_with(|| root.join("traces"));
        self.out.get_or_insert_with(|| root.join("dataset.bin"));
        self.stride.get_or_insert(self.seq_len);
        self
    }
}

/// Every `*.csv` in `dir`, sorted by name, parsed.
pub fn read_traces(dir: &Path) -> Result<Vec<(String, FlowTrace)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no trace CSV files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            Ok((id, FlowTrace::read_csv(p)?))
        })
        .collect()
}

pub fn run(args: BuildDatasetArgs) -> Result<()> {
    let started = Instant::now();
    let input = args.input.clone().expect("resolved");
    let out = args.out.clone().expect("resolved");
    let config = PipelineConfig {
        seq_len: args.seq_len,
        stride: args.stride.expect("resolved"),
        smooth_window: args.smooth_window,
        ratios: SplitRatios {
            train: args.train,
            validation: args.val,
            test: args.test,
        },
        seed: args.seed,
        unit: match args.split_unit {
            Unit::Sequence => SplitUnit::Sequence,
            Unit::Flow => SplitUnit::Flow,
        },
    };
    let traces = read_traces(&input)?;
    let (dataset, report) = build_dataset(traces, &config)?;
    print!("{report}");
    println!(
        "train {}  validation {}  test {}",
        dataset.train.len(),
        dataset.validation.len(),
        dataset.test.len()
    );

    let mut outputs = Outputs::default();
    let path = outputs.file(&out)?;
    write_dataset(&dataset, &path)?;
    let mut manifest = RunManifest::new(NAME, &args)?;
    manifest.seed("split", args.seed);
    manifest.inputs.push(input);
    manifest.write(&beside(&out), &mut outputs, started)?;
    outputs.commit();
    println!("wrote {}", out.display());
    Ok(())
}
