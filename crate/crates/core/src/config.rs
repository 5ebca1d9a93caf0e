//! Cache geometry and policy tuning parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// All tunable simulation parameters: cache geometry, blocking threshold,
/// interval length, history depth, and access latencies.
///
/// Defaults model a 2 MiB 16-way LLC with 2048 sets of 64-byte blocks,
/// 32 sampled sets, blocking threshold 29, and an 8-deep history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    /// Number of sets; must be a power of two.
    pub num_sets: usize,
    /// Ways per set; must be a power of two, at most 64.
    pub num_ways: usize,
    /// Block (line) size in bytes; must be a power of two.
    pub block_size_bytes: u64,
    /// Interval write count at or above which a way is blocked.
    pub threshold: u64,
    /// Interval length in cycles; counters reset and masks recompute at
    /// every multiple of this.
    pub interval_cycles: u64,
    /// Depth of the per-set counter history ring and the per-IP variance
    /// history ring.
    pub history_depth: usize,
    /// Sampled sets are those whose top `sample_bits` index bits equal
    /// their bottom `sample_bits` bits. 6 bits over 2048 sets selects 32.
    pub sample_bits: u32,
    /// Saturation bound for PC-table values; values stay in
    /// `[-pc_limit, +pc_limit]`.
    pub pc_limit: i32,
    /// When true, the variance feedback comparator is inverted: a
    /// not-worse variance after blocking increments the blocking IP's
    /// value instead of decrementing it.
    pub invert_feedback: bool,
    pub hit_latency_cycles: u64,
    pub miss_latency_cycles: u64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            num_sets: 2048,
            num_ways: 16,
            block_size_bytes: 64,
            threshold: 29,
            interval_cycles: 10_000,
            history_depth: 8,
            sample_bits: 6,
            pc_limit: 16,
            invert_feedback: false,
            hit_latency_cycles: 20,
            miss_latency_cycles: 200,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{name} must be a power of two, got {value}")]
    NotPowerOfTwo { name: &'static str, value: u64 },
    #[error("{name} must be at least {min}, got {value}")]
    TooSmall {
        name: &'static str,
        min: u64,
        value: u64,
    },
    #[error("num_ways must be at most 64, got {0}")]
    TooManyWays(usize),
    #[error("num_sets ({num_sets}) must be at least 2^sample_bits (2^{sample_bits})")]
    SampleBitsTooLarge { num_sets: usize, sample_bits: u32 },
    #[error("miss_latency_cycles ({miss}) must exceed hit_latency_cycles ({hit})")]
    LatencyOrder { hit: u64, miss: u64 },
}

impl CacheConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn pow2(name: &'static str, value: u64) -> Result<(), ConfigError> {
            if value == 0 || !value.is_power_of_two() {
                Err(ConfigError::NotPowerOfTwo { name, value })
            } else {
                Ok(())
            }
        }
        fn at_least(name: &'static str, min: u64, value: u64) -> Result<(), ConfigError> {
            if value < min {
                Err(ConfigError::TooSmall { name, min, value })
            } else {
                Ok(())
            }
        }

        pow2("num_sets", self.num_sets as u64)?;
        pow2("num_ways", self.num_ways as u64)?;
        pow2("block_size_bytes", self.block_size_bytes)?;
        if self.num_ways > 64 {
            return Err(ConfigError::TooManyWays(self.num_ways));
        }
        at_least("threshold", 1, self.threshold)?;
        at_least("interval_cycles", 1, self.interval_cycles)?;
        at_least("history_depth", 1, self.history_depth as u64)?;
        at_least("pc_limit", 1, self.pc_limit.max(0) as u64)?;
        if self.num_sets < (1usize << self.sample_bits) {
            return Err(ConfigError::SampleBitsTooLarge {
                num_sets: self.num_sets,
                sample_bits: self.sample_bits,
            });
        }
        if self.miss_latency_cycles <= self.hit_latency_cycles {
            return Err(ConfigError::LatencyOrder {
                hit: self.hit_latency_cycles,
                miss: self.miss_latency_cycles,
            });
        }
        Ok(())
    }

    /// log2(num_sets); the number of set-index bits.
    pub fn set_index_bits(&self) -> u32 {
        self.num_sets.trailing_zeros()
    }

    /// log2(block_size_bytes); the number of block-offset bits.
    pub fn block_offset_bits(&self) -> u32 {
        self.block_size_bytes.trailing_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = CacheConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.num_sets, 2048);
        assert_eq!(cfg.num_ways, 16);
        assert_eq!(cfg.threshold, 29);
        assert_eq!(cfg.history_depth, 8);
        assert_eq!(cfg.set_index_bits(), 11);
        assert_eq!(cfg.block_offset_bits(), 6);
    }

    #[test]
    fn rejects_non_power_of_two_sets() {
        let cfg = CacheConfig {
            num_sets: 1000,
            ..CacheConfig::default()
        };
        assert_eq!(
            cfg.validate(),
            Err(ConfigError::NotPowerOfTwo {
                name: "num_sets",
                value: 1000
            })
        );
    }

    #[test]
    fn rejects_sample_bits_wider_than_index() {
        let cfg = CacheConfig {
            num_sets: 16,
            sample_bits: 6,
            ..CacheConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::SampleBitsTooLarge { .. })
        ));
    }

    #[test]
    fn rejects_zero_threshold_and_interval() {
        let cfg = CacheConfig {
            threshold: 0,
            ..CacheConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = CacheConfig {
            interval_cycles: 0,
            ..CacheConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_miss_latency_not_above_hit_latency() {
        let cfg = CacheConfig {
            hit_latency_cycles: 50,
            miss_latency_cycles: 50,
            ..CacheConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::LatencyOrder { .. })));
    }

    #[test]
    fn single_set_config_with_zero_sample_bits_is_valid() {
        let cfg = CacheConfig {
            num_sets: 1,
            sample_bits: 0,
            ..CacheConfig::default()
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_json_round_trips_and_rejects_unknown_keys() {
        let cfg = CacheConfig::default();
        let js = serde_json::to_string(&cfg).unwrap();
        let back: CacheConfig = serde_json::from_str(&js).unwrap();
        assert_eq!(cfg, back);

        let bad: Result<CacheConfig, _> = serde_json::from_str(r#"{"num_setz": 4}"#);
        assert!(bad.is_err());

        // Missing keys take defaults.
        let partial: CacheConfig = serde_json::from_str(r#"{"threshold": 10}"#).unwrap();
        assert_eq!(partial.threshold, 10);
        assert_eq!(partial.num_sets, 2048);
    }
}
