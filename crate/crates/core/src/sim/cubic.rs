//! TCP Cubic window growth with the Reno-friendly region.
//!
//! After a reduction the window follows `W(t) = C·(t − K)³ + W_max` with
//! `K = cbrt(W_max·(1 − β)/C)`, so `W(0) = β·W_max` and `W(K) = W_max`.
//! On short-RTT paths the cubic curve is far slower than Reno, and the
//! Reno-friendly estimate `W_est` takes over as in RFC 8312.

pub const DEFAULT_C_SCALE: f64 = 0.4;
pub const DEFAULT_BETA_CUBIC: f64 = 0.7;
pub const MIN_CWND_PKTS: f64 = 2.0;
pub const INITIAL_CWND_PKTS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicState {
    /// Window at the last reduction.
    pub w_max_pkts: f64,
    pub t_since_reduction_s: f64,
    /// Inflection time of the cubic curve.
    pub k_s: f64,
    pub c_scale: f64,
    pub beta_cubic: f64,
    pub cwnd_pkts: f64,
    pub ssthresh_pkts: f64,
    /// Reno-friendly window estimate.
    pub w_est_pkts: f64,
}

impl CubicState {
    pub fn new(c_scale: f64, beta_cubic: f64) -> Self {
        Self {
            w_max_pkts: 0.0,
            t_since_reduction_s: 0.0,
            k_s: 0.0,
            c_scale,
            beta_cubic,
            cwnd_pkts: INITIAL_CWND_PKTS,
            ssthresh_pkts: f64::INFINITY,
            w_est_pkts: INITIAL_CWND_PKTS,
        }
    }

    /// State right after a reduction from `w_max_pkts`.
    pub fn after_reduction(w_max_pkts: f64, c_scale: f64, beta_cubic: f64) -> Self {
        let cwnd = (beta_cubic * w_max_pkts).max(MIN_CWND_PKTS);
        Self {
            w_max_pkts,
            t_since_reduction_s: 0.0,
            k_s: inflection_time(w_max_pkts, c_scale, beta_cubic),
            c_scale,
            beta_cubic,
            cwnd_pkts: cwnd,
            ssthresh_pkts: cwnd,
            w_est_pkts: cwnd,
        }
    }

    pub fn in_slow_start(&self) -> bool {
        self.cwnd_pkts < self.ssthresh_pkts
    }
}

impl Default for CubicState {
    fn default() -> Self {
        Self::new(DEFAULT_C_SCALE, DEFAULT_BETA_CUBIC)
    }
}

pub fn inflection_time(w_max_pkts: f64, c_scale: f64, beta_cubic: f64) -> f64 {
    (w_max_pkts * (1.0 - beta_cubic) / c_scale).cbrt()
}

/// Cubic window `t_s` seconds after the last reduction, floored at 2 packets.
pub fn cubic_window(state: &CubicState, t_s: f64) -> f64 {
    let offset = t_s - state.k_s;
    (state.c_scale * offset * offset * offset + state.w_max_pkts).max(MIN_CWND_PKTS)
}

/// Advances Cubic by one round of `acks` packets lasting `elapsed_s`, with
/// smoothed round-trip time `rtt_s`.
pub fn step_cubic(state: CubicState, acks: f64, rtt_s: f64, elapsed_s: f64, loss: bool) -> CubicState {
    if loss {
        return CubicState::after_reduction(state.cwnd_pkts, state.c_scale, state.beta_cubic);
    }
    let acks = acks.max(0.0);
    let mut next = state;
    if next.in_slow_start() {
        next.cwnd_pkts = (next.cwnd_pkts + acks).min(next.ssthresh_pkts);
        next.w_est_pkts = next.cwnd_pkts;
        return next;
    }
    next.t_since_reduction_s += elapsed_s;
    let target = cubic_window(&next, next.t_since_reduction_s + rtt_s).min(1.5 * next.cwnd_pkts);
    if target > next.cwnd_pkts {
        let grown = next.cwnd_pkts + (target - next.cwnd_pkts) * acks / next.cwnd_pkts;
        next.cwnd_pkts = grown.min(target);
    }
    let beta = next.beta_cubic;
    next.w_est_pkts += acks * 3.0 * (1.0 - beta) / (1.0 + beta) / state.cwnd_pkts;
    next.cwnd_pkts = next.cwnd_pkts.max(next.w_est_pkts);
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reduced(w_max: f64) -> CubicState {
        CubicState::after_reduction(w_max, 0.4, 0.7)
    }

    #[test]
    fn inflection_time_matches_cube_root() {
        let s = reduced(100.0);
        assert!((s.k_s - 75f64.cbrt()).abs() < 1e-12);
        assert!((s.k_s - 4.2172).abs() < 1e-4);
        // cross-check by cubing back
        assert!((s.k_s.powi(3) - 75.0).abs() < 1e-9);
    }

    #[test]
    fn anchor_points() {
        let s = reduced(100.0);
        assert_eq!(cubic_window(&s, s.k_s), 100.0);
        let w0 = cubic_window(&s, 0.0);
        assert!((w0 - 70.0).abs() / 70.0 < 1e-9, "W(0) = {w0}");
    }

    #[test]
    fn loss_reduces_by_beta() {
        let mut s = CubicState::default();
        s.ssthresh_pkts = 1.0;
        s.cwnd_pkts = 40.0;
        let next = step_cubic(s, 0.0, 1e-3, 1e-3, true);
        assert_eq!(next.w_max_pkts, 40.0);
        assert!((next.cwnd_pkts - 28.0).abs() < 1e-12);
        assert_eq!(next.t_since_reduction_s, 0.0);
    }

    #[test]
    fn reno_friendly_region_dominates_on_short_rtt() {
        // 100 µs rounds: the cubic curve barely moves, W_est grows ~0.53/RTT.
        let mut s = reduced(20.0);
        let start = s.cwnd_pkts;
        for _ in 0..10 {
            let acks = s.cwnd_pkts;
            s = step_cubic(s, acks, 1e-4, 1e-4, false);
        }
        let friendly = 3.0 * 0.3 / 1.7;
        assert!((s.cwnd_pkts - start - 10.0 * friendly).abs() < 1e-9);
    }

    #[test]
    fn long_rtt_follows_cubic_curve() {
        let mut s = reduced(100.0);
        let mut t = 0.0;
        for _ in 0..40 {
            let acks = s.cwnd_pkts;
            s = step_cubic(s, acks, 0.1, 0.1, false);
            t += 0.1;
        }
        // cwnd chases W(t + rtt) and never overshoots it
        assert!(s.cwnd_pkts <= cubic_window(&s, t + 0.1) + 1e-9 || s.cwnd_pkts <= s.w_est_pkts + 1e-9);
        assert!(s.cwnd_pkts > 90.0);
    }

    proptest! {
        #[test]
        fn window_function_anchors(w_max in 2.0f64..1e5, beta in 0.05f64..0.95, c in 0.01f64..10.0) {
            let s = CubicState::after_reduction(w_max, c, beta);
            prop_assert_eq!(cubic_window(&s, s.k_s), w_max.max(MIN_CWND_PKTS));
            let w0 = c * (-s.k_s).powi(3) + w_max;
            prop_assert!((w0 - beta * w_max).abs() <= 1e-9 * beta * w_max);
        }

        #[test]
        fn increasing_past_inflection(w_max in 2.0f64..1e5, dt1 in 1e-3f64..10.0, dt2 in 1e-3f64..10.0) {
            let s = reduced(w_max);
            let a = cubic_window(&s, s.k_s + dt1);
            let b = cubic_window(&s, s.k_s + dt1 + dt2);
            prop_assert!(b > a);
        }
    }
}
