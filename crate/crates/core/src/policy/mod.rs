//! Wear-leveling policies.
//!
//! Three policies share one interface: [`NonePolicy`] never blocks,
//! [`ThresholdPolicy`] blocks any way whose previous-interval write count
//! reached the threshold, and [`ProposedPolicy`] adds sampled-set
//! counters, a write history, and a PC-indexed table trained by variance
//! feedback so that blocking generalizes to unsampled sets.

mod baseline;
mod proposed;

pub use baseline::{NonePolicy, ThresholdPolicy};
pub use proposed::{CounterCell, ProposedPolicy};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cache::WayMask;
use crate::config::CacheConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    None,
    Threshold,
    Proposed,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::None, PolicyKind::Threshold, PolicyKind::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::None => "none",
            PolicyKind::Threshold => "threshold",
            PolicyKind::Proposed => "proposed",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PolicyKind::None),
            "threshold" => Ok(PolicyKind::Threshold),
            "proposed" => Ok(PolicyKind::Proposed),
            other => Err(format!(
                "unknown policy '{other}' (expected none, threshold, or proposed)"
            )),
        }
    }
}

/// Hooks the simulation engine drives on every policy.
pub trait WearPolicy {
    fn kind(&self) -> PolicyKind;

    /// Ways currently blocked for writes in `set_index`.
    fn block_mask(&self, set_index: usize) -> WayMask;

    /// Called for every wear event (fill or write hit) committed to a cell.
    fn record_wear_event(&mut self, set_index: usize, way: usize, ip: u64);

    /// Consulted on a write miss: should the default victim be blocked
    /// because of the writing instruction pointer? Only the proposed
    /// policy answers true, and only for unsampled sets.
    fn unsampled_write_blocked(&self, set_index: usize, ip: u64) -> bool;

    /// Record a block applied lazily at write time (unsampled sets); it
    /// persists until the next interval boundary.
    fn apply_lazy_block(&mut self, set_index: usize, way: usize);

    /// Interval boundary: apply feedback, archive counters, derive fresh
    /// masks, and reset per-interval state.
    fn on_interval_boundary(&mut self);
}

/// True when the top `sample_bits` bits of the set index equal its bottom
/// `sample_bits` bits. Over 2048 sets with 6 bits this selects 32 sets
/// spread across the index space.
pub fn is_sampled_set(set_index: usize, cfg: &CacheConfig) -> bool {
    let bits = cfg.sample_bits;
    let mask = if bits == 0 { 0 } else { (1u64 << bits) - 1 };
    let shift = cfg.set_index_bits() - bits;
    let s = set_index as u64;
    ((s >> shift) & mask) == (s & mask)
}

/// Precomputed sampled-set membership: a dense slot per sampled set plus
/// a per-set reverse map.
#[derive(Clone, Debug)]
pub struct SampledSets {
    sets: Vec<usize>,
    slot_by_set: Vec<Option<u32>>,
}

impl SampledSets {
    pub fn new(cfg: &CacheConfig) -> Self {
        let mut sets = Vec::new();
        let mut slot_by_set = vec![None; cfg.num_sets];
        for (set, slot) in slot_by_set.iter_mut().enumerate() {
            if is_sampled_set(set, cfg) {
                *slot = Some(sets.len() as u32);
                sets.push(set);
            }
        }
        Self { sets, slot_by_set }
    }

    pub fn count(&self) -> usize {
        self.sets.len()
    }

    /// Sampled set indices in ascending order.
    pub fn sets(&self) -> &[usize] {
        &self.sets
    }

    pub fn slot_of(&self, set_index: usize) -> Option<usize> {
        self.slot_by_set[set_index].map(|s| s as usize)
    }

    pub fn contains(&self, set_index: usize) -> bool {
        self.slot_by_set[set_index].is_some()
    }
}

/// Population variance (divisor n) of a sequence of counts.
///
/// Computed as (n·Σc² − (Σc)²)/n² with exact integer accumulation, which
/// keeps results exact for the count magnitudes this simulator produces.
pub fn population_variance(counts: &[u64]) -> f64 {
    assert!(!counts.is_empty(), "population_variance of empty sequence");
    let n = counts.len() as u128;
    let mut sum: u128 = 0;
    let mut sum_sq: u128 = 0;
    for &c in counts {
        let c = c as u128;
        sum += c;
        sum_sq += c * c;
    }
    let numerator = n * sum_sq - sum * sum;
    numerator as f64 / (n as f64 * n as f64)
}

/// Recency-weighted mean of a chronological sequence: value i (1-based,
/// oldest first) carries weight i, so recent entries dominate.
pub fn weighted_mean(history: &[f64]) -> f64 {
    assert!(!history.is_empty(), "weighted_mean of empty history");
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &v) in history.iter().enumerate() {
        let w = (i + 1) as f64;
        num += w * v;
        den += w;
    }
    num / den
}

/// Coefficient of variation (σ/μ) of a count map; 0 when all counts are 0.
pub fn coefficient_of_variation(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let sum: u128 = counts.iter().map(|&c| c as u128).sum();
    if sum == 0 {
        return 0.0;
    }
    let mean = sum as f64 / counts.len() as f64;
    population_variance(counts).sqrt() / mean
}

/// Block every way whose previous-interval count reached `threshold`;
/// if that blocks the whole set, unblock the way with the minimum count
/// (lowest index on ties) so the set can still accept writes.
pub fn derive_block_mask(prev_counts: &[u64], threshold: u64) -> WayMask {
    let mut mask = WayMask::EMPTY;
    for (way, &count) in prev_counts.iter().enumerate() {
        if count >= threshold {
            mask.insert(way);
        }
    }
    if mask.is_full(prev_counts.len()) {
        let coldest = prev_counts
            .iter()
            .enumerate()
            .min_by_key(|&(_, &c)| c)
            .map(|(w, _)| w)
            .expect("non-empty counts");
        mask.remove(coldest);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_zero_is_sampled() {
        assert!(is_sampled_set(0, &CacheConfig::default()));
    }

    #[test]
    fn set_1057_is_sampled() {
        // 1057 = 1024 + 32 + 1: bits 10, 5, 0 set, which satisfies the
        // top-6 == bottom-6 constraint for an 11-bit index.
        assert!(is_sampled_set(1057, &CacheConfig::default()));
    }

    #[test]
    fn default_config_samples_exactly_32_sets() {
        let cfg = CacheConfig::default();
        let count = (0..cfg.num_sets).filter(|&s| is_sampled_set(s, &cfg)).count();
        assert_eq!(count, 32);
    }

    #[test]
    fn sampled_count_matches_closed_form_across_geometries() {
        for (num_sets, sample_bits) in [(2048usize, 6u32), (256, 4), (64, 3), (1024, 0), (16, 2)] {
            let cfg = CacheConfig {
                num_sets,
                sample_bits,
                ..CacheConfig::default()
            };
            cfg.validate().unwrap();
            let count = (0..num_sets).filter(|&s| is_sampled_set(s, &cfg)).count();
            if sample_bits < cfg.set_index_bits() {
                assert_eq!(count, num_sets >> sample_bits);
            }
            assert_eq!(SampledSets::new(&cfg).count(), count);
        }
    }

    #[test]
    fn sampled_slots_are_dense_and_ascending() {
        let cfg = CacheConfig::default();
        let sampled = SampledSets::new(&cfg);
        for (slot, &set) in sampled.sets().iter().enumerate() {
            assert_eq!(sampled.slot_of(set), Some(slot));
        }
        assert!(sampled.sets().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sampled.slot_of(2), None);
    }

    #[test]
    fn variance_of_constant_sequence_is_zero() {
        assert_eq!(population_variance(&[5, 5, 5, 5]), 0.0);
    }

    #[test]
    fn variance_matches_hand_computed_values() {
        assert_eq!(population_variance(&[0, 29]), 210.25);
        assert_eq!(population_variance(&[1, 2, 3, 4]), 1.25);
    }

    #[test]
    #[should_panic(expected = "empty sequence")]
    fn variance_of_empty_sequence_panics() {
        population_variance(&[]);
    }

    #[test]
    fn weighted_mean_of_single_element_is_identity() {
        assert_eq!(weighted_mean(&[42.5]), 42.5);
    }

    #[test]
    fn weighted_mean_favors_recent_values() {
        let wm = weighted_mean(&[10.0, 20.0]);
        assert!((wm - 50.0 / 3.0).abs() < 1e-12);
        assert_eq!(weighted_mean(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn weighted_mean_stays_within_value_bounds() {
        let mut rng = crate::tracegen::SplitMix64::new(3);
        for _ in 0..1000 {
            let len = (rng.next_u64() % 8 + 1) as usize;
            let vals: Vec<f64> = (0..len).map(|_| rng.next_f64() * 1e6).collect();
            let wm = weighted_mean(&vals);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(wm >= lo - 1e-9 && wm <= hi + 1e-9);
        }
    }

    #[test]
    fn mask_blocks_at_threshold_and_above() {
        let mask = derive_block_mask(&[29, 28, 30, 0], 29);
        assert!(mask.contains(0));
        assert!(!mask.contains(1));
        assert!(mask.contains(2));
        assert!(!mask.contains(3));
    }

    #[test]
    fn fully_blocked_set_keeps_coldest_way_open() {
        let counts = vec![40u64; 16];
        let mask = derive_block_mask(&counts, 29);
        assert_eq!(mask.len(), 15);
        assert!(!mask.contains(0)); // tie broken toward lowest index

        let mut counts = vec![40u64; 16];
        counts[7] = 29;
        let mask = derive_block_mask(&counts, 29);
        assert_eq!(mask.len(), 15);
        assert!(!mask.contains(7));
    }

    #[test]
    fn cov_is_zero_for_empty_or_unworn_maps() {
        assert_eq!(coefficient_of_variation(&[]), 0.0);
        assert_eq!(coefficient_of_variation(&[0, 0, 0]), 0.0);
        let cov = coefficient_of_variation(&[10, 10, 10, 10]);
        assert_eq!(cov, 0.0);
    }

    #[test]
    fn policy_kind_parses_and_prints() {
        assert_eq!("proposed".parse::<PolicyKind>().unwrap(), PolicyKind::Proposed);
        assert!("bogus".parse::<PolicyKind>().is_err());
        assert_eq!(PolicyKind::Threshold.to_string(), "threshold");
    }
}
