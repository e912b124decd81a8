//! BBRv1 state machine driven once per round trip.
//!
//! Bottleneck bandwidth is a windowed max over the last `bw_window_rounds`
//! delivery-rate samples and the propagation delay a min over
//! `rt_prop_window_s`. The congestion window is always held at
//! `cwnd_gain × BDP` (4 packets during ProbeRTT, still capped by the BDP
//! bound).

use std::collections::VecDeque;

pub const STARTUP_GAIN: f64 = 2.885;
pub const PROBE_BW_GAINS: [f64; 8] = [1.25, 0.75, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
pub const INITIAL_CWND_PKTS: f64 = 10.0;
pub const PROBE_RTT_CWND_PKTS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbrConfig {
    pub cwnd_gain: f64,
    pub startup_gain: f64,
    pub cycle_gains: [f64; 8],
    /// Growth below this ratio counts as a plateau round in Startup.
    pub plateau_growth: f64,
    pub plateau_rounds_to_exit: u32,
    pub bw_window_rounds: u64,
    pub rt_prop_window_s: f64,
    pub probe_rtt_duration_s: f64,
    pub mss_bytes: u32,
}

impl Default for BbrConfig {
    fn default() -> Self {
        Self {
            cwnd_gain: 3.0,
            startup_gain: STARTUP_GAIN,
            cycle_gains: PROBE_BW_GAINS,
            plateau_growth: 1.25,
            plateau_rounds_to_exit: 3,
            bw_window_rounds: 10,
            rt_prop_window_s: 10.0,
            probe_rtt_duration_s: 0.2,
            mss_bytes: 1460,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BbrPhase {
    Startup,
    Drain,
    ProbeBw,
    ProbeRtt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbrState {
    pub phase: BbrPhase,
    pub btl_bw_bits_per_s: f64,
    /// Infinite until the first RTT sample.
    pub rt_prop_s: f64,
    pub pacing_gain: f64,
    pub cwnd_gain: f64,
    pub cycle_index: usize,
    pub plateau_rounds: u32,
    pub cwnd_pkts: f64,
    pub config: BbrConfig,
    full_bw_bits_per_s: f64,
    filled_pipe: bool,
    round_count: u64,
    bw_samples: VecDeque<(u64, f64)>,
    rt_prop_stamp_s: f64,
    cycle_stamp_s: f64,
    probe_rtt_done_s: f64,
}

impl BbrState {
    pub fn new(config: BbrConfig) -> Self {
        Self {
            phase: BbrPhase::Startup,
            btl_bw_bits_per_s: 0.0,
            rt_prop_s: f64::INFINITY,
            pacing_gain: config.startup_gain,
            cwnd_gain: config.cwnd_gain,
            cycle_index: 0,
            plateau_rounds: 0,
            cwnd_pkts: INITIAL_CWND_PKTS,
            config,
            full_bw_bits_per_s: 0.0,
            filled_pipe: false,
            round_count: 0,
            bw_samples: VecDeque::new(),
            rt_prop_stamp_s: 0.0,
            cycle_stamp_s: 0.0,
            probe_rtt_done_s: 0.0,
        }
    }

    /// A state already in ProbeBW at `cycle_index` with the given estimates.
    pub fn probing(config: BbrConfig, btl_bw_bits_per_s: f64, rt_prop_s: f64, cycle_index: usize, now_s: f64) -> Self {
        let mut s = Self::new(config);
        s.phase = BbrPhase::ProbeBw;
        s.filled_pipe = true;
        s.btl_bw_bits_per_s = btl_bw_bits_per_s;
        s.full_bw_bits_per_s = btl_bw_bits_per_s;
        s.bw_samples.push_back((0, btl_bw_bits_per_s));
        s.rt_prop_s = rt_prop_s;
        s.rt_prop_stamp_s = now_s;
        s.cycle_index = cycle_index % 8;
        s.pacing_gain = config.cycle_gains[s.cycle_index];
        s.cycle_stamp_s = now_s;
        s.cwnd_pkts = s.cwnd_cap_pkts().unwrap_or(INITIAL_CWND_PKTS);
        s
    }

    pub fn has_estimate(&self) -> bool {
        self.btl_bw_bits_per_s > 0.0 && self.rt_prop_s.is_finite()
    }

    /// Estimated bandwidth-delay product in packets.
    pub fn bdp_pkts(&self) -> Option<f64> {
        self.has_estimate().then(|| {
            self.btl_bw_bits_per_s * self.rt_prop_s / 8.0 / f64::from(self.config.mss_bytes)
        })
    }

    pub fn cwnd_cap_pkts(&self) -> Option<f64> {
        self.bdp_pkts().map(|bdp| self.cwnd_gain * bdp)
    }

    /// Sending budget in bits for a round lasting `round_s`.
    pub fn send_budget_bits(&self, round_s: f64) -> f64 {
        let window = self.cwnd_pkts * 8.0 * f64::from(self.config.mss_bytes);
        if self.btl_bw_bits_per_s > 0.0 {
            window.min(self.pacing_gain * self.btl_bw_bits_per_s * round_s)
        } else {
            window
        }
    }

    fn enter_probe_bw(&mut self, now_s: f64) {
        self.phase = BbrPhase::ProbeBw;
        self.cycle_index = 0;
        self.pacing_gain = self.config.cycle_gains[0];
        self.cycle_stamp_s = now_s;
    }
}

impl Default for BbrState {
    fn default() -> Self {
        Self::new(BbrConfig::default())
    }
}

/// Advances BBR by one round with a delivery-rate sample and an RTT sample.
pub fn step_bbr(mut state: BbrState, delivered_bits_per_s: f64, rtt_s: f64, now_s: f64) -> BbrState {
    let cfg = state.config;
    state.round_count += 1;

    state.bw_samples.push_back((state.round_count, delivered_bits_per_s.max(0.0)));
    while let Some(&(round, _)) = state.bw_samples.front() {
        if round + cfg.bw_window_rounds <= state.round_count {
            state.bw_samples.pop_front();
        } else {
            break;
        }
    }
    state.btl_bw_bits_per_s = state.bw_samples.iter().map(|&(_, bw)| bw).fold(0.0, f64::max);

    let rt_prop_expired = state.rt_prop_s.is_finite() && now_s > state.rt_prop_stamp_s + cfg.rt_prop_window_s;
    if rtt_s <= state.rt_prop_s || rt_prop_expired {
        state.rt_prop_s = rtt_s;
        state.rt_prop_stamp_s = now_s;
    }

    let inflight_pkts = delivered_bits_per_s * rtt_s / 8.0 / f64::from(cfg.mss_bytes);

    match state.phase {
        BbrPhase::Startup => {
            if state.btl_bw_bits_per_s >= state.full_bw_bits_per_s * cfg.plateau_growth {
                state.full_bw_bits_per_s = state.btl_bw_bits_per_s;
                state.plateau_rounds = 0;
            } else {
                state.plateau_rounds += 1;
            }
            if state.plateau_rounds >= cfg.plateau_rounds_to_exit {
                state.filled_pipe = true;
                state.phase = BbrPhase::Drain;
                state.pacing_gain = 1.0 / cfg.startup_gain;
            }
        }
        BbrPhase::Drain => {
            if state.bdp_pkts().is_some_and(|bdp| inflight_pkts <= bdp) {
                state.enter_probe_bw(now_s);
            }
        }
        BbrPhase::ProbeBw => {
            if now_s - state.cycle_stamp_s >= state.rt_prop_s {
                state.cycle_index = (state.cycle_index + 1) % cfg.cycle_gains.len();
                state.pacing_gain = cfg.cycle_gains[state.cycle_index];
                state.cycle_stamp_s = now_s;
            }
        }
        BbrPhase::ProbeRtt => {
            if now_s >= state.probe_rtt_done_s {
                state.rt_prop_stamp_s = now_s;
                if state.filled_pipe {
                    state.enter_probe_bw(now_s);
                } else {
                    state.phase = BbrPhase::Startup;
                    state.pacing_gain = cfg.startup_gain;
                }
            }
        }
    }

    if rt_prop_expired && state.phase != BbrPhase::ProbeRtt {
        state.phase = BbrPhase::ProbeRtt;
        state.pacing_gain = 1.0;
        state.probe_rtt_done_s = now_s + cfg.probe_rtt_duration_s;
    }

    if let Some(cap) = state.cwnd_cap_pkts() {
        state.cwnd_pkts = match state.phase {
            BbrPhase::ProbeRtt => PROBE_RTT_CWND_PKTS.min(cap),
            _ => cap,
        };
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn startup_exits_after_three_flat_rounds() {
        // independent plateau counter
        let samples = [100e6, 110e6, 112e6, 113e6];
        let mut full = 0.0;
        let mut flat = 0;
        let mut oracle_exit = None;
        for (i, &bw) in samples.iter().enumerate() {
            if bw >= full * 1.25 {
                full = bw;
                flat = 0;
            } else {
                flat += 1;
            }
            if flat >= 3 && oracle_exit.is_none() {
                oracle_exit = Some(i);
            }
        }
        assert_eq!(oracle_exit, Some(3));

        let mut s = BbrState::default();
        for (i, &bw) in samples.iter().enumerate() {
            s = step_bbr(s, bw, 0.01, 0.01 * i as f64);
            if i < 3 {
                assert_eq!(s.phase, BbrPhase::Startup, "round {i}");
            }
        }
        assert_eq!(s.phase, BbrPhase::Drain);
        assert!((s.pacing_gain - 1.0 / 2.885).abs() < 1e-12);
    }

    #[test]
    fn growing_bandwidth_stays_in_startup() {
        let mut s = BbrState::default();
        let mut bw = 1e6;
        for i in 0..20 {
            s = step_bbr(s, bw, 0.01, 0.01 * i as f64);
            bw *= 1.3;
        }
        assert_eq!(s.phase, BbrPhase::Startup);
        assert_eq!(s.pacing_gain, STARTUP_GAIN);
    }

    #[test]
    fn cwnd_cap_is_gain_times_bdp() {
        let s = BbrState::probing(BbrConfig::default(), 1e9, 9e-5, 2, 0.0);
        let cap = s.cwnd_cap_pkts().unwrap();
        let expected = 3.0 * (1e9 * 9e-5 / 8.0) / 1460.0;
        assert!((cap - expected).abs() < 1e-12);
        assert!((cap - 23.1).abs() < 0.02);
        assert_eq!(s.cwnd_pkts, cap);
    }

    #[test]
    fn probe_bw_cycles_once_per_rt_prop() {
        let s = BbrState::probing(BbrConfig::default(), 1e8, 0.05, 0, 1.0);
        assert_eq!(s.pacing_gain, 1.25);
        let s = step_bbr(s, 1e8, 0.05, 1.05);
        assert_eq!(s.cycle_index, 1);
        assert_eq!(s.pacing_gain, 0.75);
        // not yet another rt_prop later
        let s = step_bbr(s, 1e8, 0.05, 1.07);
        assert_eq!(s.cycle_index, 1);
        let s = step_bbr(s, 1e8, 0.05, 1.10);
        assert_eq!(s.cycle_index, 2);
        assert_eq!(s.pacing_gain, 1.0);
    }

    #[test]
    fn drain_hands_over_when_queue_is_gone() {
        let mut s = BbrState::default();
        for (i, bw) in [100e6, 100e6, 100e6, 100e6].into_iter().enumerate() {
            s = step_bbr(s, bw, 0.01, 0.01 * i as f64);
        }
        assert_eq!(s.phase, BbrPhase::Drain);
        // in-flight = 100 Mbps * 30 ms, above BDP of 100 Mbps * 10 ms
        s = step_bbr(s, 100e6, 0.03, 0.05);
        assert_eq!(s.phase, BbrPhase::Drain);
        s = step_bbr(s, 40e6, 0.01, 0.06);
        assert_eq!(s.phase, BbrPhase::ProbeBw);
        assert_eq!(s.cycle_index, 0);
    }

    #[test]
    fn stale_min_rtt_triggers_probe_rtt() {
        let cfg = BbrConfig::default();
        let mut s = BbrState::probing(cfg, 1e8, 0.01, 3, 0.0);
        let mut now = 0.0;
        while now <= 10.0 {
            now += 0.011;
            s = step_bbr(s, 1e8, 0.011, now);
        }
        assert_eq!(s.phase, BbrPhase::ProbeRtt);
        assert!(s.cwnd_pkts <= PROBE_RTT_CWND_PKTS);
        let entered = now;
        while now < entered + 0.2 {
            now += 0.011;
            s = step_bbr(s, 1e8, 0.011, now);
        }
        assert_eq!(s.phase, BbrPhase::ProbeBw);
        assert!(s.cwnd_pkts > PROBE_RTT_CWND_PKTS);
    }

    #[test]
    fn randomized_steps_respect_cap() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut s = BbrState::default();
        let mut now = 0.0;
        for _ in 0..20_000 {
            let bw = 10f64.powf(rng.gen_range(3.0..10.5));
            let rtt = 10f64.powf(rng.gen_range(-5.0..0.0));
            now += rng.gen_range(0.0..0.5);
            s = step_bbr(s, bw, rtt, now);
            let cap = s.cwnd_cap_pkts().unwrap();
            assert!(s.cwnd_pkts <= cap + 1.0);
        }
    }

    proptest! {
        #[test]
        fn rt_prop_is_a_min_filter(rtts in proptest::collection::vec(1e-5f64..1.0, 1..50)) {
            let mut s = BbrState::default();
            for (i, &rtt) in rtts.iter().enumerate() {
                s = step_bbr(s, 1e7, rtt, i as f64 * 1e-3);
            }
            let min = rtts.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(s.rt_prop_s, min);
        }
    }
}
