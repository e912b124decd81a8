//! TCP Reno: slow start, additive increase, halving on loss.

/// Minimum slow-start threshold after a loss, in packets.
pub const MIN_SSTHRESH_PKTS: f64 = 2.0;
pub const INITIAL_CWND_PKTS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenoPhase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenoState {
    pub cwnd_pkts: f64,
    pub ssthresh_pkts: f64,
    pub phase: RenoPhase,
}

impl Default for RenoState {
    fn default() -> Self {
        Self {
            cwnd_pkts: INITIAL_CWND_PKTS,
            ssthresh_pkts: f64::INFINITY,
            phase: RenoPhase::SlowStart,
        }
    }
}

/// Advances Reno by one acknowledgement batch.
///
/// `acks` may be fractional since the fluid model delivers fractional
/// packets per round. Congestion-avoidance growth is `acks / cwnd` with `cwnd`
/// taken at the start of the batch, i.e. one packet per window of acks.
pub fn step_reno(state: RenoState, acks: f64, loss: bool) -> RenoState {
    if loss {
        let ssthresh = (state.cwnd_pkts / 2.0).max(MIN_SSTHRESH_PKTS);
        return RenoState {
            cwnd_pkts: ssthresh,
            ssthresh_pkts: ssthresh,
            phase: RenoPhase::CongestionAvoidance,
        };
    }
    let acks = acks.max(0.0);
    let mut next = state;
    let mut remaining = acks;
    if next.phase == RenoPhase::SlowStart {
        let room = next.ssthresh_pkts - next.cwnd_pkts;
        if remaining < room {
            next.cwnd_pkts += remaining;
            return next;
        }
        next.cwnd_pkts = next.ssthresh_pkts;
        next.phase = RenoPhase::CongestionAvoidance;
        remaining -= room.max(0.0);
    }
    // FastRecovery is not produced by this model; treat it as avoidance.
    next.phase = RenoPhase::CongestionAvoidance;
    next.cwnd_pkts += remaining / next.cwnd_pkts;
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ca(cwnd: f64) -> RenoState {
        RenoState {
            cwnd_pkts: cwnd,
            ssthresh_pkts: 1.0,
            phase: RenoPhase::CongestionAvoidance,
        }
    }

    #[test]
    fn loss_halves_window() {
        let next = step_reno(ca(10.0), 0.0, true);
        assert_eq!(next.ssthresh_pkts, 5.0);
        assert_eq!(next.cwnd_pkts, 5.0);
        assert_eq!(next.phase, RenoPhase::CongestionAvoidance);
    }

    #[test]
    fn loss_floors_at_two_packets() {
        let next = step_reno(ca(3.0), 0.0, true);
        assert_eq!(next.cwnd_pkts, 2.0);
    }

    #[test]
    fn slow_start_doubles_per_round() {
        let s = RenoState {
            cwnd_pkts: 4.0,
            ssthresh_pkts: 64.0,
            phase: RenoPhase::SlowStart,
        };
        let next = step_reno(s, 4.0, false);
        assert_eq!(next.cwnd_pkts, 8.0);
        assert_eq!(next.phase, RenoPhase::SlowStart);
    }

    #[test]
    fn slow_start_hands_over_at_ssthresh() {
        let s = RenoState {
            cwnd_pkts: 6.0,
            ssthresh_pkts: 8.0,
            phase: RenoPhase::SlowStart,
        };
        let next = step_reno(s, 4.0, false);
        // 2 acks reach ssthresh, the other 2 grow by 2/8.
        assert_eq!(next.phase, RenoPhase::CongestionAvoidance);
        assert!((next.cwnd_pkts - 8.25).abs() < 1e-12);
    }

    #[test]
    fn avoidance_adds_one_per_window() {
        // Per-ack loop with the window snapshot of the round as denominator.
        let start = 10.0;
        let mut oracle = start;
        for _ in 0..10 {
            oracle += 1.0 / start;
        }
        let next = step_reno(ca(start), 10.0, false);
        assert!((next.cwnd_pkts - oracle).abs() < 1e-12);
        assert!((next.cwnd_pkts - 11.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn loss_step_is_halving(cwnd in 1.0f64..1e6, ss in 1.0f64..1e6, slow in any::<bool>()) {
            let phase = if slow && cwnd < ss { RenoPhase::SlowStart } else { RenoPhase::CongestionAvoidance };
            let pre = RenoState { cwnd_pkts: cwnd, ssthresh_pkts: ss, phase };
            let post = step_reno(pre, 0.0, true);
            prop_assert_eq!(post.ssthresh_pkts, (cwnd / 2.0).max(2.0));
            prop_assert_eq!(post.cwnd_pkts, post.ssthresh_pkts);
        }

        #[test]
        fn window_never_below_one(cwnd in 1.0f64..1e4, acks in 0.0f64..1e4, loss in any::<bool>()) {
            let post = step_reno(ca(cwnd), acks, loss);
            prop_assert!(post.cwnd_pkts >= 1.0);
            if post.phase == RenoPhase::SlowStart {
                prop_assert!(post.cwnd_pkts < post.ssthresh_pkts);
            }
        }
    }
}
