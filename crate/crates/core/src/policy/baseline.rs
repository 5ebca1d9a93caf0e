//! Baseline policies: no blocking at all, and threshold-only blocking
//! with full per-set counters (no sampling, no history, no PC table).

use crate::cache::WayMask;
use crate::config::CacheConfig;
use crate::policy::{derive_block_mask, PolicyKind, WearPolicy};

/// Never blocks anything; the unmodified-cache baseline.
#[derive(Debug, Default)]
pub struct NonePolicy;

impl NonePolicy {
    pub fn new() -> Self {
        NonePolicy
    }
}

impl WearPolicy for NonePolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::None
    }

    fn block_mask(&self, _set_index: usize) -> WayMask {
        WayMask::EMPTY
    }

    fn record_wear_event(&mut self, _set_index: usize, _way: usize, _ip: u64) {}

    fn unsampled_write_blocked(&self, _set_index: usize, _ip: u64) -> bool {
        false
    }

    fn apply_lazy_block(&mut self, _set_index: usize, _way: usize) {
        debug_assert!(false, "none policy never requests lazy blocks");
    }

    fn on_interval_boundary(&mut self) {}
}

/// Threshold-only blocking over every set: any way whose previous-interval
/// write count reached the threshold is blocked for the next interval.
/// This is the baseline whose excessive blocking oscillates.
pub struct ThresholdPolicy {
    num_ways: usize,
    threshold: u64,
    counts: Vec<u64>,
    masks: Vec<WayMask>,
}

impl ThresholdPolicy {
    pub fn new(cfg: &CacheConfig) -> Self {
        Self {
            num_ways: cfg.num_ways,
            threshold: cfg.threshold,
            counts: vec![0; cfg.num_sets * cfg.num_ways],
            masks: vec![WayMask::EMPTY; cfg.num_sets],
        }
    }

    pub fn interval_count(&self, set_index: usize, way: usize) -> u64 {
        self.counts[set_index * self.num_ways + way]
    }
}

impl WearPolicy for ThresholdPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Threshold
    }

    fn block_mask(&self, set_index: usize) -> WayMask {
        self.masks[set_index]
    }

    fn record_wear_event(&mut self, set_index: usize, way: usize, _ip: u64) {
        self.counts[set_index * self.num_ways + way] += 1;
    }

    fn unsampled_write_blocked(&self, _set_index: usize, _ip: u64) -> bool {
        false
    }

    fn apply_lazy_block(&mut self, _set_index: usize, _way: usize) {
        debug_assert!(false, "threshold policy never requests lazy blocks");
    }

    fn on_interval_boundary(&mut self) {
        for (set_index, mask) in self.masks.iter_mut().enumerate() {
            let row = &self.counts[set_index * self.num_ways..(set_index + 1) * self.num_ways];
            *mask = derive_block_mask(row, self.threshold);
        }
        self.counts.fill(0);
    }
}
