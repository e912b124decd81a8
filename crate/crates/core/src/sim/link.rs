use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bottleneck path and noise knobs for one simulated flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub capacity_bits_per_s: f64,
    /// Two-way propagation delay.
    pub base_rtt_s: f64,
    /// Droptail queue depth.
    pub buffer_pkts: u32,
    pub mss_bytes: u32,
    pub seed: u64,
    /// Independent per-packet loss probability on top of droptail overflow.
    pub random_loss_rate: f64,
    /// Half-width of the per-flow multiplicative jitter on capacity and base
    /// RTT (0.05 draws each factor uniformly from [0.95, 1.05]).
    pub jitter: f64,
    /// Mean of the per-round extra path delay, drawn uniformly from
    /// `[0, 2·mean]`. Models delay variation from traffic sharing the path.
    pub delay_noise_s: f64,
    /// Simulated-time cap after which an unfinished flow is cut off.
    pub max_duration_s: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            capacity_bits_per_s: 1e9,
            base_rtt_s: 9e-5,
            buffer_pkts: DEFAULT_BUFFER_PKTS,
            mss_bytes: 1460,
            seed: 0,
            random_loss_rate: 0.0,
            jitter: 0.05,
            delay_noise_s: DEFAULT_DELAY_NOISE_S,
            max_duration_s: 600.0,
        }
    }
}

pub const DEFAULT_BUFFER_PKTS: u32 = 4;
pub const DEFAULT_DELAY_NOISE_S: f64 = 4.5e-5;

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.capacity_bits_per_s > 0.0 && self.capacity_bits_per_s.is_finite()) {
            return bad("capacity must be positive");
        }
        if !(self.base_rtt_s > 0.0 && self.base_rtt_s.is_finite()) {
            return bad("base RTT must be positive");
        }
        if self.buffer_pkts < 1 {
            return bad("buffer must hold at least one packet");
        }
        if self.mss_bytes < 1 {
            return bad("MSS must be positive");
        }
        if !(0.0..1.0).contains(&self.random_loss_rate) {
            return bad("random loss rate must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return bad("jitter must be in [0, 1)");
        }
        if !(self.delay_noise_s >= 0.0 && self.delay_noise_s.is_finite()) {
            return bad("delay noise must be nonnegative");
        }
        if self.max_duration_s.is_nan() || self.max_duration_s <= 0.0 {
            return bad("duration cap must be positive");
        }
        Ok(())
    }

    pub fn bdp_pkts(&self) -> f64 {
        self.capacity_bits_per_s * self.base_rtt_s / 8.0 / f64::from(self.mss_bytes)
    }
}

/// Path parameters a flow actually saw after per-flow jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub capacity_bits_per_s: f64,
    pub base_rtt_s: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        let link = LinkConfig::default();
        link.validate().unwrap();
        assert!((link.bdp_pkts() - 7.705).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_values() {
        for link in [
            LinkConfig { capacity_bits_per_s: 0.0, ..Default::default() },
            LinkConfig { base_rtt_s: -1.0, ..Default::default() },
            LinkConfig { buffer_pkts: 0, ..Default::default() },
            LinkConfig { random_loss_rate: 1.0, ..Default::default() },
        ] {
            assert!(link.validate().is_err());
        }
    }
}
