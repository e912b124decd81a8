//! Round-by-round fluid simulation of one flow over a droptail bottleneck.
//!
//! Each round lasts one RTT, `base_rtt + noise + queue/capacity`. Window
//! protocols offer one congestion window per round, BBR offers
//! `min(cwnd, pacing_gain · btl_bw · round)`. The bottleneck serves at most
//! `capacity · round` bits; anything left queues, and queue beyond
//! `buffer_pkts` is dropped and signals loss. Rounds are sliced at sampling
//! interval boundaries to build the per-interval records.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::bbr::{step_bbr, BbrConfig, BbrState};
use super::cubic::{step_cubic, CubicState, DEFAULT_BETA_CUBIC, DEFAULT_C_SCALE};
use super::link::{LinkConfig, PathParams};
use super::reno::{step_reno, RenoState};
use super::vegas::{step_vegas, vegas_on_loss, VegasState, DEFAULT_ALPHA_PKTS, DEFAULT_BETA_PKTS};
use crate::error::{Error, Result};
use crate::label::ProtocolLabel;
use crate::seed::{self, stream};
use crate::trace::{FeatureRecord, FlowTrace, SimulatedPath};

pub const DEFAULT_SAMPLE_INTERVAL_S: f64 = 0.1;

/// Algorithm constants for the four protocols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub cubic_c: f64,
    pub cubic_beta: f64,
    pub vegas_alpha_pkts: f64,
    pub vegas_beta_pkts: f64,
    pub bbr: BbrConfig,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            cubic_c: DEFAULT_C_SCALE,
            cubic_beta: DEFAULT_BETA_CUBIC,
            vegas_alpha_pkts: DEFAULT_ALPHA_PKTS,
            vegas_beta_pkts: DEFAULT_BETA_PKTS,
            bbr: BbrConfig::default(),
        }
    }
}

enum Controller {
    Reno(RenoState),
    Cubic(CubicState),
    Vegas(VegasState),
    Bbr(Box<BbrState>),
}

impl Controller {
    fn new(label: ProtocolLabel, cfg: &ProtocolConfig, mss_bytes: u32) -> Self {
        match label {
            ProtocolLabel::Reno => Controller::Reno(RenoState::default()),
            ProtocolLabel::Cubic => Controller::Cubic(CubicState::new(cfg.cubic_c, cfg.cubic_beta)),
            ProtocolLabel::Vegas => {
                Controller::Vegas(VegasState::new(cfg.vegas_alpha_pkts, cfg.vegas_beta_pkts))
            }
            ProtocolLabel::Bbr => Controller::Bbr(Box::new(BbrState::new(BbrConfig {
                mss_bytes,
                ..cfg.bbr
            }))),
        }
    }

    fn cwnd_pkts(&self) -> f64 {
        match self {
            Controller::Reno(s) => s.cwnd_pkts,
            Controller::Cubic(s) => s.cwnd_pkts,
            Controller::Vegas(s) => s.cwnd_pkts,
            Controller::Bbr(s) => s.cwnd_pkts,
        }
    }

    fn offered_bits(&self, round_s: f64, pkt_bits: f64) -> f64 {
        match self {
            Controller::Bbr(s) => s.send_budget_bits(round_s),
            other => other.cwnd_pkts() * pkt_bits,
        }
    }

    fn on_round(&mut self, delivered_bits: f64, round_s: f64, now_s: f64, pkt_bits: f64, loss: bool) {
        let acks = delivered_bits / pkt_bits;
        match self {
            Controller::Reno(s) => *s = step_reno(*s, acks, loss),
            Controller::Cubic(s) => *s = step_cubic(*s, acks, round_s, round_s, loss),
            Controller::Vegas(s) => {
                *s = if loss { vegas_on_loss(*s) } else { step_vegas(*s, round_s) };
            }
            Controller::Bbr(s) => {
                let state = std::mem::take(s.as_mut());
                **s = step_bbr(state, delivered_bits / round_s, round_s, now_s);
            }
        }
    }
}

/// Per-interval accumulator. Delivered bytes are carried as a fraction and
/// released in whole bytes, never more than the link could carry in one
/// interval, so sizes stay integral and conserve the transfer exactly.
struct Sampler {
    interval_s: f64,
    cap_bytes: f64,
    index: u64,
    bytes: f64,
    carry: f64,
    max_cwnd_bytes: f64,
    rtt_sum: f64,
    rtt_count: u32,
    last_rtt: f64,
    emitted: u64,
    records: Vec<FeatureRecord>,
}

impl Sampler {
    fn interval_end(&self) -> f64 {
        (self.index + 1) as f64 * self.interval_s
    }

    fn emit(&mut self) {
        let available = self.bytes + self.carry;
        let size = available.floor().min(self.cap_bytes.floor()).max(0.0);
        self.carry = available - size;
        self.push(size as u64);
    }

    fn push(&mut self, size_bytes: u64) {
        let rtt_ms = if self.rtt_count > 0 {
            self.rtt_sum / f64::from(self.rtt_count) * 1e3
        } else {
            self.last_rtt * 1e3
        };
        self.emitted += size_bytes;
        self.records.push(FeatureRecord {
            time_s: self.index as f64 * self.interval_s,
            size_bytes,
            max_win_bytes: self.max_cwnd_bytes.round() as u64,
            throughput_mbps: size_bytes as f64 * 8.0 / self.interval_s / 1e6,
            smoothed_mbps: None,
            rtt_ms,
        });
        self.index += 1;
        self.bytes = 0.0;
        self.max_cwnd_bytes = 0.0;
        self.rtt_sum = 0.0;
        self.rtt_count = 0;
    }

    /// Spreads a round's deliveries over the intervals it overlaps.
    fn add_round(&mut self, start_s: f64, round_s: f64, delivered_bytes: f64, cwnd_bytes: f64, rtt_s: f64) {
        self.rtt_sum += rtt_s;
        self.rtt_count += 1;
        self.last_rtt = rtt_s;
        let end_s = start_s + round_s;
        let mut t = start_s;
        while end_s > self.interval_end() {
            let boundary = self.interval_end();
            let share = (boundary - t).max(0.0) / round_s;
            self.bytes += delivered_bytes * share;
            self.max_cwnd_bytes = self.max_cwnd_bytes.max(cwnd_bytes);
            self.emit();
            t = boundary;
        }
        self.bytes += delivered_bytes * (end_s - t).max(0.0) / round_s;
        self.max_cwnd_bytes = self.max_cwnd_bytes.max(cwnd_bytes);
    }

    /// Flushes the open interval. For a completed transfer the remaining
    /// whole bytes are released exactly, spilling into extra intervals if the
    /// per-interval cap holds some back.
    fn finish(&mut self, completed_bytes: Option<u64>) {
        let Some(total) = completed_bytes else {
            self.emit();
            return;
        };
        let cap = self.cap_bytes.floor() as u64;
        loop {
            let remaining = total.saturating_sub(self.emitted);
            let size = remaining.min(cap);
            self.push(size);
            if size == remaining {
                break;
            }
            self.max_cwnd_bytes = self.records.last().map_or(0.0, |r| r.max_win_bytes as f64);
        }
        self.carry = 0.0;
    }
}

/// Simulates `transfer_bytes` of `label` traffic with default protocol constants.
pub fn simulate_flow(
    label: ProtocolLabel,
    link: &LinkConfig,
    transfer_bytes: u64,
    sample_interval_s: f64,
) -> Result<FlowTrace> {
    simulate_flow_with(label, link, &ProtocolConfig::default(), transfer_bytes, sample_interval_s)
}

pub fn simulate_flow_with(
    label: ProtocolLabel,
    link: &LinkConfig,
    protocols: &ProtocolConfig,
    transfer_bytes: u64,
    sample_interval_s: f64,
) -> Result<FlowTrace> {
    if transfer_bytes == 0 {
        return Err(Error::InvalidArgument("transfer size must be positive".into()));
    }
    if !(sample_interval_s > 0.0 && sample_interval_s.is_finite()) {
        return Err(Error::InvalidArgument("sample interval must be positive".into()));
    }
    link.validate()?;

    let mut jitter_rng: ChaCha8Rng = seed::rng(seed::derive(link.seed, &[stream::JITTER]));
    let factor = |rng: &mut ChaCha8Rng| {
        if link.jitter > 0.0 {
            1.0 + rng.gen_range(-link.jitter..=link.jitter)
        } else {
            1.0
        }
    };
    let effective = PathParams {
        capacity_bits_per_s: link.capacity_bits_per_s * factor(&mut jitter_rng),
        base_rtt_s: link.base_rtt_s * factor(&mut jitter_rng),
    };
    let mut noise_rng = seed::rng(seed::derive(link.seed, &[stream::NOISE]));

    let capacity = effective.capacity_bits_per_s;
    let pkt_bits = f64::from(link.mss_bytes) * 8.0;
    let buffer_bits = f64::from(link.buffer_pkts) * pkt_bits;
    let target_bits = transfer_bytes as f64 * 8.0;

    let mut controller = Controller::new(label, protocols, link.mss_bytes);
    let mut sampler = Sampler {
        interval_s: sample_interval_s,
        cap_bytes: capacity * sample_interval_s / 8.0,
        index: 0,
        bytes: 0.0,
        carry: 0.0,
        max_cwnd_bytes: 0.0,
        rtt_sum: 0.0,
        rtt_count: 0,
        last_rtt: effective.base_rtt_s,
        emitted: 0,
        records: Vec::new(),
    };

    let mut queue_bits = 0.0f64;
    let mut delivered_total_bits = 0.0f64;
    let mut now = 0.0f64;
    let mut completed = false;

    while now < link.max_duration_s {
        let noise = if link.delay_noise_s > 0.0 {
            noise_rng.gen_range(0.0..2.0 * link.delay_noise_s)
        } else {
            0.0
        };
        let rtt_s = effective.base_rtt_s + noise + queue_bits / capacity;
        let mut round_s = rtt_s;
        let cwnd_bytes = controller.cwnd_pkts() * f64::from(link.mss_bytes);
        let offered = controller.offered_bits(round_s, pkt_bits);

        let backlog = queue_bits + offered;
        let mut served = backlog.min(capacity * round_s);
        queue_bits = backlog - served;
        let mut loss = false;
        if queue_bits > buffer_bits {
            queue_bits = buffer_bits;
            loss = true;
        }
        if link.random_loss_rate > 0.0 {
            let pkts = offered / pkt_bits;
            let p_round = 1.0 - (1.0 - link.random_loss_rate).powf(pkts);
            if noise_rng.gen::<f64>() < p_round {
                loss = true;
            }
        }

        let remaining = target_bits - delivered_total_bits;
        let finishing = served >= remaining;
        if finishing {
            round_s *= remaining / served;
            served = remaining;
        }
        sampler.add_round(now, round_s, served / 8.0, cwnd_bytes, rtt_s);
        delivered_total_bits += served;
        now += round_s;
        if finishing {
            completed = true;
            break;
        }
        controller.on_round(served, round_s, now, pkt_bits, loss);
    }
    sampler.finish(completed.then_some(transfer_bytes));

    Ok(FlowTrace {
        label,
        records: sampler.records,
        interval_s: sample_interval_s,
        path: Some(SimulatedPath {
            link: *link,
            effective,
        }),
        transfer_bytes,
        completed,
    })
}
