//! TCP Vegas: delay-based window adjustment.
//!
//! Once per round the expected-minus-actual backlog
//! `diff = cwnd·(1 − base_rtt/rtt)` is compared against `alpha` and `beta`.

pub const DEFAULT_ALPHA_PKTS: f64 = 2.0;
pub const DEFAULT_BETA_PKTS: f64 = 4.0;
pub const MIN_CWND_PKTS: f64 = 2.0;
pub const INITIAL_CWND_PKTS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VegasState {
    pub cwnd_pkts: f64,
    /// Minimum RTT observed so far; infinite before the first sample.
    pub base_rtt_s: f64,
    pub alpha_pkts: f64,
    pub beta_pkts: f64,
}

impl VegasState {
    pub fn new(alpha_pkts: f64, beta_pkts: f64) -> Self {
        debug_assert!(alpha_pkts < beta_pkts);
        Self {
            cwnd_pkts: INITIAL_CWND_PKTS,
            base_rtt_s: f64::INFINITY,
            alpha_pkts,
            beta_pkts,
        }
    }

    /// Backlog estimate for an RTT sample against the current base RTT.
    pub fn diff_pkts(&self, rtt_s: f64) -> f64 {
        self.cwnd_pkts * (1.0 - self.base_rtt_s / rtt_s)
    }
}

impl Default for VegasState {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHA_PKTS, DEFAULT_BETA_PKTS)
    }
}

/// One per-round Vegas update. The window never drops below 2 packets.
pub fn step_vegas(state: VegasState, rtt_s: f64) -> VegasState {
    let mut next = state;
    next.base_rtt_s = next.base_rtt_s.min(rtt_s);
    let diff = next.diff_pkts(rtt_s);
    if diff < next.alpha_pkts {
        next.cwnd_pkts += 1.0;
    } else if diff > next.beta_pkts {
        next.cwnd_pkts = (next.cwnd_pkts - 1.0).max(MIN_CWND_PKTS);
    }
    next
}

/// Loss response (Vegas falls back to Reno's halving).
pub fn vegas_on_loss(state: VegasState) -> VegasState {
    VegasState {
        cwnd_pkts: (state.cwnd_pkts / 2.0).max(MIN_CWND_PKTS),
        ..state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(cwnd: f64, base: f64) -> VegasState {
        VegasState {
            cwnd_pkts: cwnd,
            base_rtt_s: base,
            ..VegasState::default()
        }
    }

    #[test]
    fn inside_band_holds() {
        let s = state(20.0, 0.100);
        assert!((s.diff_pkts(0.120) - 20.0 / 6.0).abs() < 1e-12);
        assert_eq!(step_vegas(s, 0.120).cwnd_pkts, 20.0);
    }

    #[test]
    fn empty_queue_increases() {
        assert_eq!(step_vegas(state(20.0, 0.100), 0.100).cwnd_pkts, 21.0);
    }

    #[test]
    fn large_backlog_decreases() {
        let s = state(40.0, 0.100);
        assert!((s.diff_pkts(0.120) - 40.0 / 6.0).abs() < 1e-12);
        assert_eq!(step_vegas(s, 0.120).cwnd_pkts, 39.0);
    }

    #[test]
    fn base_rtt_tracks_minimum() {
        let s = step_vegas(state(10.0, 0.100), 0.080);
        assert_eq!(s.base_rtt_s, 0.080);
        let s = step_vegas(s, 0.200);
        assert_eq!(s.base_rtt_s, 0.080);
    }

    #[test]
    fn first_sample_sets_base() {
        let s = step_vegas(VegasState::default(), 1e-4);
        assert_eq!(s.base_rtt_s, 1e-4);
        assert_eq!(s.cwnd_pkts, INITIAL_CWND_PKTS + 1.0);
    }

    proptest! {
        #[test]
        fn window_moves_by_exactly_one_or_not_at_all(
            cwnd in 3.0f64..1e4,
            base in 1e-5f64..1.0,
            extra in 0.0f64..2.0,
        ) {
            let s = state(cwnd, base);
            let rtt = base * (1.0 + extra);
            let diff = s.diff_pkts(rtt);
            let post = step_vegas(s, rtt);
            if (s.alpha_pkts..=s.beta_pkts).contains(&diff) {
                prop_assert_eq!(post.cwnd_pkts, cwnd);
            } else {
                prop_assert_eq!((post.cwnd_pkts - cwnd).abs(), 1.0);
            }
            prop_assert!(post.base_rtt_s <= s.base_rtt_s);
        }
    }
}
