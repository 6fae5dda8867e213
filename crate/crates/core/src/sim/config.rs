use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ChannelRealization;

/// Chip duration of the simulated pulses, seconds.
pub const DEFAULT_CHIP_DURATION: f64 = 0.375e-9;

/// Everything defining one DS-UWB SC-FDE scenario: block geometry, spreading,
/// user load, cyclic-prefix budget and the SNR operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    /// Symbols per block (N).
    pub symbols_per_block: usize,
    /// Spreading gain (Nc), a power of two.
    pub spreading_gain: usize,
    /// Active users; user 1 is the desired one. Walsh column 0 (all ones) is
    /// reserved, so at most Nc − 1 users fit.
    pub users: usize,
    /// Cyclic-prefix length in chips.
    pub cp_len_chips: usize,
    /// Samples per chip folded into the discrete tap model; only used to
    /// budget the prefix against the channel length.
    pub samples_per_chip: usize,
    /// Ratio of user 1's received signal power to total noise power, dB.
    pub snr_db: f64,
    /// Chip duration in seconds (metadata for rate accounting).
    pub chip_duration: f64,
    /// Master seed for every random draw of the scenario.
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            symbols_per_block: 32,
            spreading_gain: 8,
            users: 1,
            cp_len_chips: 35,
            samples_per_chip: 3,
            snr_db: 0.0,
            chip_duration: DEFAULT_CHIP_DURATION,
            seed: 1,
        }
    }
}

impl SystemConfig {
    /// Chips per block, M = N·Nc.
    pub fn block_chips(&self) -> usize {
        self.symbols_per_block * self.spreading_gain
    }

    pub fn validate(&self) -> Result<()> {
        if self.symbols_per_block == 0 {
            return Err(Error::Config("symbols_per_block must be >= 1".into()));
        }
        if self.spreading_gain == 0 || !self.spreading_gain.is_power_of_two() {
            return Err(Error::Config(format!(
                "spreading_gain {} must be a power of two",
                self.spreading_gain
            )));
        }
        if self.users == 0 || self.users > self.spreading_gain - 1 {
            return Err(Error::Config(format!(
                "users {} outside 1..={} (one Walsh code is reserved)",
                self.users,
                self.spreading_gain - 1
            )));
        }
        if self.cp_len_chips == 0 || self.samples_per_chip == 0 {
            return Err(Error::Config(
                "cp_len_chips and samples_per_chip must be >= 1".into(),
            ));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        if !(self.chip_duration > 0.0) {
            return Err(Error::Config("chip_duration must be positive".into()));
        }
        Ok(())
    }

    /// The prefix (in samples) must cover the channel spread so no energy
    /// leaks between blocks.
    pub fn validate_channel(&self, ch: &ChannelRealization) -> Result<()> {
        let budget = self.cp_len_chips * self.samples_per_chip;
        if ch.len() > budget {
            return Err(Error::Config(format!(
                "channel spread {} samples exceeds the cyclic-prefix budget {} ({} chips x {} samples)",
                ch.len(),
                budget,
                self.cp_len_chips,
                self.samples_per_chip
            )));
        }
        if ch.len() > self.block_chips() {
            return Err(Error::Config(format!(
                "channel length {} exceeds the block size {}",
                ch.len(),
                self.block_chips()
            )));
        }
        Ok(())
    }

    /// Uncoded bit rate implied by the block geometry, bits/s.
    pub fn uncoded_rate_bps(&self) -> f64 {
        let chips = (self.block_chips() + self.cp_len_chips) as f64;
        self.symbols_per_block as f64 / (chips * self.chip_duration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_and_rate() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.block_chips(), 256);
        // (256 + 35) chips of 0.375 ns carry 32 bits: just over 293 Mbit/s.
        let rate = cfg.uncoded_rate_bps();
        assert!((rate / 1e6 - 293.2).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut cfg = SystemConfig::default();
        cfg.spreading_gain = 6;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::default();
        cfg.users = 8;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::default();
        cfg.users = 7;
        assert!(cfg.validate().is_ok());
    }
}
