//! Acceptance criteria, one test each. Every test prints a single
//! `[PASS]`/`[FAIL]` line (written straight to stdout so it shows even when
//! output capture is on) before asserting.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ccid_core::features::{
    balance, build_dataset, decode_dataset, encode_dataset, smooth, split, DatasetSplit, PipelineConfig,
    SequenceSample, SplitRatios, SplitUnit,
};
use ccid_core::nn::{forward, log_softmax_at, loss_and_grads, Checkpoint, HeadInit, ModelConfig, ModelParams};
use ccid_core::seed::{self, stream};
use ccid_core::sim::{
    cubic_window, simulate_flow, step_bbr, step_reno, step_vegas, BbrState, CubicState, LinkConfig, RenoPhase,
    RenoState, VegasState,
};
use ccid_core::train::{
    adam_step, evaluate, plateau_schedule, train, AdamHyper, EpochMetrics, OptimizerState, PlateauState,
    TrainConfig, TrainOutcome,
};
use ccid_core::trace::FlowTrace;
use ccid_core::ProtocolLabel;
use rand::Rng;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[{tag}] criterion {n:>2}: {name}: {detail}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn random_rows(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len * 5).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

#[test]
fn c01_gradient_correctness() {
    let started = Instant::now();
    let cfg = ModelConfig {
        input_size: 5,
        hidden_size: 4,
        num_layers: 1,
        attention_dim: 4,
        num_classes: 4,
        dropout: 0.0,
        head_init: HeadInit::Uniform,
    };
    let params = ModelParams::init(cfg, 101).unwrap();
    let mut rng = seed::rng(102);
    let xs: Vec<Vec<f64>> = (0..4).map(|_| random_rows(&mut rng, 5)).collect();
    let batch: Vec<(&[f64], usize)> = xs.iter().enumerate().map(|(i, x)| (x.as_slice(), i)).collect();
    let (_, grads) = loss_and_grads(&params, &batch, false, 0).unwrap();
    let loss_at = |p: &ModelParams| loss_and_grads(p, &batch, false, 0).unwrap().0;

    let eps = 1e-5;
    let mut worst = (String::new(), 0.0f64);
    let analytic: Vec<(String, Vec<f64>)> = grads.tensors().into_iter().map(|(n, t)| (n, t.to_vec())).collect();
    for (ti, (name, g)) in analytic.iter().enumerate() {
        for (i, &a) in g.iter().enumerate() {
            let mut plus = params.clone();
            plus.tensors_mut()[ti].1[i] += eps;
            let mut minus = params.clone();
            minus.tensors_mut()[ti].1[i] -= eps;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * eps);
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-6);
            if rel > worst.1 {
                worst = (name.clone(), rel);
            }
        }
    }
    let elapsed = started.elapsed();
    report(
        1,
        "gradient check",
        worst.1 < 1e-4 && elapsed < Duration::from_secs(30),
        &format!(
            "{} parameters, max relative error {:.2e} ({}), {:.1} s",
            params.num_parameters(),
            worst.1,
            worst.0,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c02_uniform_start_loss() {
    // full-size model, training mode, two sequences of each class
    let params = ModelParams::init(ModelConfig::default(), 5).unwrap();
    let mut rng = seed::rng(6);
    let xs: Vec<Vec<f64>> = (0..8).map(|_| random_rows(&mut rng, 60)).collect();
    let loss: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (logits, _) = forward(&params, x, true, i as u64).unwrap();
            -log_softmax_at(&logits, i % 4)
        })
        .sum::<f64>()
        / 8.0;
    let target = 4f64.ln();
    report(
        2,
        "uniform-start loss",
        (loss - target).abs() <= 0.05,
        &format!("loss {loss:.6} vs ln 4 = {target:.6} ({} parameters)", params.num_parameters()),
    );
}

#[test]
fn c03_adam_oracle() {
    let cfg = ModelConfig {
        input_size: 1,
        hidden_size: 1,
        num_layers: 1,
        attention_dim: 1,
        num_classes: 4,
        dropout: 0.0,
        head_init: HeadInit::Zero,
    };
    let hyper = AdamHyper::default();
    let mut p = ModelParams::zeros(cfg);
    let mut g = p.zeros_like();
    g.head.bias[0] = 1.0;
    let mut state = OptimizerState::new(&p, 7.5e-5);
    adam_step(&mut p, &g, &mut state, hyper).unwrap();
    let first = p.head.bias[0];
    let first_ok = (first + 7.49999e-5).abs() <= 1e-10;

    // five steps with a constant gradient against a scalar implementation
    let grad = 0.37;
    let lr = 7.5e-5;
    let mut p = ModelParams::zeros(cfg);
    p.attention.score[0] = 0.25;
    let mut g = p.zeros_like();
    g.attention.score[0] = grad;
    let mut state = OptimizerState::new(&p, lr);
    let (mut theta, mut m, mut v) = (0.25f64, 0.0f64, 0.0f64);
    let mut max_diff = 0.0f64;
    for t in 1..=5 {
        adam_step(&mut p, &g, &mut state, hyper).unwrap();
        m = 0.9 * m + 0.1 * grad;
        v = 0.999 * v + 0.001 * grad * grad;
        let m_hat = m / (1.0 - 0.9f64.powi(t));
        let v_hat = v / (1.0 - 0.999f64.powi(t));
        theta -= lr * m_hat / (v_hat.sqrt() + 1e-8);
        max_diff = max_diff.max((p.attention.score[0] - theta).abs());
    }
    report(
        3,
        "Adam oracle",
        first_ok && max_diff <= 1e-12,
        &format!("first step {first:.10e}; five-step max deviation {max_diff:.1e}"),
    );
}

#[test]
fn c04_scheduler_trigger() {
    // best 0.8 at epoch 3, epochs 4-8 stall, 9 improves, 10-14 stall again
    let val = [1.0, 0.9, 0.8, 0.8, 0.85, 0.9, 0.81, 0.8, 0.7, 0.7, 0.71, 0.72, 0.7, 0.75];
    let mut state = PlateauState::default();
    let mut lr = 7.5e-5;
    let lrs: Vec<f64> = val
        .iter()
        .map(|&v| {
            lr = plateau_schedule(&mut state, v, lr, 0.5, 5);
            lr
        })
        .collect();
    let mut expected = vec![7.5e-5; 7];
    expected.extend([3.75e-5; 6]);
    expected.push(1.875e-5);
    let first_drop = lrs.iter().position(|&l| l < 7.5e-5).map(|i| i + 1);
    report(
        4,
        "plateau scheduler",
        lrs == expected,
        &format!("first cut after epoch {first_drop:?}, final lr {:e}", lrs[lrs.len() - 1]),
    );
}

#[test]
fn c05_protocol_oracles() {
    let mut rng = seed::rng(55);
    let mut failures = Vec::new();

    let mut reno_ok = true;
    for _ in 0..1000 {
        let cwnd = rng.gen_range(4.0..1e4);
        let s = RenoState {
            cwnd_pkts: cwnd,
            ssthresh_pkts: rng.gen_range(2.0..1e4),
            phase: RenoPhase::CongestionAvoidance,
        };
        let next = step_reno(s, rng.gen_range(0.0..100.0), true);
        reno_ok &= next.cwnd_pkts == cwnd / 2.0 && next.ssthresh_pkts == cwnd / 2.0;
    }
    if !reno_ok {
        failures.push("reno halving");
    }

    let mut cubic_err = 0.0f64;
    for _ in 0..1000 {
        let w_max = rng.gen_range(2.0..1e5);
        let s = CubicState::after_reduction(w_max, 0.4, 0.7);
        let k = s.k_s;
        cubic_err = cubic_err.max(((cubic_window(&s, k) - w_max) / w_max).abs());
        cubic_err = cubic_err.max(((cubic_window(&s, 0.0) - 0.7 * w_max) / (0.7 * w_max)).abs());
    }
    if cubic_err > 1e-9 {
        failures.push("cubic anchors");
    }

    let mut vegas_checked = 0;
    let mut vegas_ok = true;
    while vegas_checked < 1000 {
        let base = rng.gen_range(1e-5..0.5);
        let mut s = VegasState::default();
        s.cwnd_pkts = rng.gen_range(2.0..500.0);
        s.base_rtt_s = base;
        let rtt = base * rng.gen_range(1.0..3.0);
        let diff = s.diff_pkts(rtt);
        if (s.alpha_pkts..=s.beta_pkts).contains(&diff) {
            vegas_ok &= step_vegas(s, rtt).cwnd_pkts == s.cwnd_pkts;
            vegas_checked += 1;
        }
    }
    if !vegas_ok {
        failures.push("vegas fixed region");
    }

    let mut bbr = BbrState::default();
    let mut now = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let bw = 10f64.powf(rng.gen_range(3.0..10.5));
        let rtt = 10f64.powf(rng.gen_range(-5.0..0.0));
        now += rng.gen_range(0.0..0.5);
        bbr = step_bbr(bbr, bw, rtt, now);
        let cap = bbr.cwnd_gain * bbr.bdp_pkts().unwrap();
        worst_excess = worst_excess.max(bbr.cwnd_pkts - cap);
    }
    if worst_excess > 1.0 {
        failures.push("bbr cap");
    }

    report(
        5,
        "protocol oracles",
        failures.is_empty(),
        &format!(
            "reno ok={reno_ok}; cubic max rel err {cubic_err:.1e}; vegas 1000 in-band states unchanged={vegas_ok}; \
             bbr max cwnd - cap over 1e5 steps {worst_excess:.3} pkts; failures {failures:?}"
        ),
    );
}

fn labelled(n_per_class: usize) -> Vec<SequenceSample> {
    ProtocolLabel::ALL
        .iter()
        .flat_map(|&label| {
            (0..n_per_class).map(move |i| SequenceSample {
                rows: vec![[i as f64; 5]; 2],
                label,
                source_id: format!("{label}-{i}"),
            })
        })
        .collect()
}

#[test]
fn c06_pipeline_oracles() {
    let mut rng = seed::rng(66);
    let mut smooth_ok = true;
    for _ in 0..1000 {
        let n: usize = rng.gen_range(1..200);
        let w: usize = rng.gen_range(1..12);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1e4)).collect();
        let brute: Vec<f64> = (0..n)
            .map(|i| {
                let lo = (i + 1).saturating_sub(w);
                let mut acc = 0.0;
                for x in &xs[lo..=i] {
                    acc += x;
                }
                acc / (i + 1 - lo) as f64
            })
            .collect();
        smooth_ok &= smooth(&xs, w) == brute;
    }

    let counts: BTreeMap<ProtocolLabel, usize> = ProtocolLabel::ALL.into_iter().zip([1777, 3221, 1802, 1629]).collect();
    let plan = balance(&counts).unwrap();
    let balance_ok = plan.values().all(|&n| n == 1629) && plan.len() == 4;

    let d = split(labelled(1000), SplitRatios::default(), 9, SplitUnit::Sequence).unwrap();
    let per = |set: &[SequenceSample], l: ProtocolLabel| set.iter().filter(|s| s.label == l).count();
    let mut split_ok = true;
    let mut shape = Vec::new();
    for l in ProtocolLabel::ALL {
        let (a, b, c) = (per(&d.train, l), per(&d.validation, l), per(&d.test, l));
        split_ok &= a.abs_diff(700) <= 1 && b.abs_diff(100) <= 1 && c.abs_diff(200) <= 1;
        shape.push(format!("{a}/{b}/{c}"));
    }
    report(
        6,
        "pipeline oracles",
        smooth_ok && balance_ok && split_ok,
        &format!("smoothing exact={smooth_ok}; balanced pools {:?}; split {}", plan.values().collect::<Vec<_>>(), shape.join(" ")),
    );
}

const E2E_FLOWS: u64 = 150;
const E2E_BYTES: u64 = 1_500_000_000;

fn e2e_dataset() -> &'static DatasetSplit {
    static DATA: OnceLock<DatasetSplit> = OnceLock::new();
    DATA.get_or_init(|| {
        let mut traces = Vec::new();
        for label in ProtocolLabel::ALL {
            for i in 0..E2E_FLOWS {
                let seed = seed::derive(2024, &[stream::FLOW, label.index() as u64, i]);
                let link = LinkConfig { seed, ..LinkConfig::default() };
                traces.push((format!("{label}_{i}"), simulate_flow(label, &link, E2E_BYTES, 0.1).unwrap()));
            }
        }
        let config = PipelineConfig { seed: 2024, ..PipelineConfig::default() };
        build_dataset(traces, &config).unwrap().0
    })
}

fn e2e_model() -> ModelConfig {
    ModelConfig {
        hidden_size: 64,
        attention_dim: 64,
        num_layers: 1,
        ..ModelConfig::default()
    }
}

fn e2e_config() -> TrainConfig {
    TrainConfig {
        epochs: 15,
        seed: 7,
        ..TrainConfig::default()
    }
}

fn e2e_run() -> &'static (TrainOutcome, Duration) {
    static RUN: OnceLock<(TrainOutcome, Duration)> = OnceLock::new();
    RUN.get_or_init(|| {
        let started = Instant::now();
        let data = e2e_dataset();
        let out = train(data, e2e_model(), &e2e_config(), &mut |_| Ok(())).unwrap();
        (out, started.elapsed())
    })
}

#[test]
fn c07_end_to_end_classification() {
    let (out, elapsed) = e2e_run();
    let data = e2e_dataset();
    let best = out.best.as_ref().expect("a best checkpoint");
    let test = evaluate(&best.params, &data.test).unwrap();
    let initial = out.initial_train.mean_loss;
    let last = out.metrics.last().unwrap().train_loss;
    report(
        7,
        "end-to-end desk-scale classification",
        test.accuracy >= 0.90 && last < 0.5 * initial && *elapsed <= Duration::from_secs(600),
        &format!(
            "{} flows/protocol, {} train / {} val / {} test sequences; test accuracy {:.2}%; \
             train loss {initial:.4} -> {last:.4}; {:.0} s",
            E2E_FLOWS,
            data.train.len(),
            data.validation.len(),
            data.test.len(),
            100.0 * test.accuracy,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c08_determinism() {
    let (first, _) = e2e_run();
    let again = train(e2e_dataset(), e2e_model(), &e2e_config(), &mut |_| Ok(())).unwrap();
    let same_bits = |a: &[EpochMetrics], b: &[EpochMetrics]| {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, y)| {
                x.epoch == y.epoch
                    && [x.train_loss, x.val_loss, x.train_acc, x.val_acc, x.lr]
                        .iter()
                        .zip([y.train_loss, y.val_loss, y.train_acc, y.val_acc, y.lr])
                        .all(|(p, q)| p.to_bits() == q.to_bits())
            })
    };
    let ok = same_bits(&first.metrics, &again.metrics) && first.last.encode() == again.last.encode();
    report(
        8,
        "determinism",
        ok,
        &format!("{} epochs compared bit for bit, final checkpoints identical={}", again.metrics.len(), first.last == again.last),
    );
}

#[test]
fn c09_size_ordering() {
    let seeds = 20;
    let mut means = BTreeMap::new();
    for label in ProtocolLabel::ALL {
        let mut total = 0.0;
        for s in 0..seeds {
            let link = LinkConfig { seed: seed::derive(99, &[label.index() as u64, s]), ..LinkConfig::default() };
            let t = simulate_flow(label, &link, 500_000_000, 0.1).unwrap();
            let full = &t.records[..t.records.len() - 1];
            total += full.iter().map(|r| r.size_bytes as f64).sum::<f64>() / full.len() as f64;
        }
        means.insert(label, total / seeds as f64 / 1e6);
    }
    let m = |l| means[&l];
    let ok = m(ProtocolLabel::Bbr) > m(ProtocolLabel::Cubic)
        && m(ProtocolLabel::Cubic) > m(ProtocolLabel::Reno)
        && m(ProtocolLabel::Reno) > m(ProtocolLabel::Vegas);
    report(
        9,
        "per-interval size ordering",
        ok,
        &format!(
            "mean MB per 100 ms over {seeds} seeds: bbr {:.3} > cubic {:.3} > reno {:.3} > vegas {:.3}",
            m(ProtocolLabel::Bbr),
            m(ProtocolLabel::Cubic),
            m(ProtocolLabel::Reno),
            m(ProtocolLabel::Vegas)
        ),
    );
}

#[test]
fn c10_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();

    let link = LinkConfig { seed: 3, ..LinkConfig::default() };
    let trace = simulate_flow(ProtocolLabel::Cubic, &link, 200_000_000, 0.1).unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    trace.write_csv(&p1).unwrap();
    FlowTrace::read_csv(&p1).unwrap().write_csv(&p2).unwrap();
    let csv_ok = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();

    let mut rng = seed::rng(10);
    let samples: Vec<SequenceSample> = ProtocolLabel::ALL
        .iter()
        .flat_map(|&label| (0..12).map(move |i| (label, i)))
        .map(|(label, i)| SequenceSample {
            rows: (0..7).map(|_| [0; 5].map(|_: i32| rng.gen_range(-1e3..1e3))).collect(),
            label,
            source_id: format!("{label}_{i}"),
        })
        .collect();
    let d = split(samples, SplitRatios::default(), 4, SplitUnit::Flow).unwrap();
    let bytes = encode_dataset(&d).unwrap();
    let dataset_ok = encode_dataset(&decode_dataset(&bytes).unwrap()).unwrap() == bytes;

    let cfg = ModelConfig { hidden_size: 5, num_layers: 2, attention_dim: 3, ..ModelConfig::default() };
    let params = ModelParams::init(cfg, 8).unwrap();
    let ckpt = Checkpoint {
        params: params.clone(),
        seq_len: 7,
        normalization: d.normalization,
        seed: 8,
        epochs: 2,
        resume: Some(ccid_core::nn::ResumeState {
            optimizer: OptimizerState::new(&params, 7.5e-5),
            scheduler: PlateauState::default(),
            best_val_loss: 0.5,
        }),
    };
    let c1 = dir.path().join("a.ckpt");
    let c2 = dir.path().join("b.ckpt");
    ckpt.write(&c1).unwrap();
    Checkpoint::read(&c1).unwrap().write(&c2).unwrap();
    let ckpt_ok = std::fs::read(&c1).unwrap() == std::fs::read(&c2).unwrap();

    report(
        10,
        "format round trips",
        csv_ok && dataset_ok && ckpt_ok,
        &format!("trace csv={csv_ok}, dataset={dataset_ok}, checkpoint={ckpt_ok}"),
    );
}
