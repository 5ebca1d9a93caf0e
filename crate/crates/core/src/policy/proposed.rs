//! Sample-based blocking with variance feedback.
//!
//! Counters and history exist only for the sampled sets. At every interval
//! boundary, ways whose counts reached the threshold are blocked for the
//! next interval, and the instruction pointer that last wrote each blocked
//! way is queued for feedback. One interval later the set's variance is
//! compared against the recency-weighted mean of that IP's variance
//! history: a not-worse variance drives the IP's PC-table value toward the
//! blocking region (negative), a worse one away from it. Unsampled sets
//! consult only the sign of the PC-table value at write-miss time.

use std::collections::{HashMap, VecDeque};

use crate::cache::WayMask;
use crate::config::CacheConfig;
use crate::policy::{
    derive_block_mask, population_variance, weighted_mean, PolicyKind, SampledSets, WearPolicy,
};

/// Per-way interval state for one sampled set: writes this interval and
/// the instruction pointer of the most recent one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CounterCell {
    pub writes: u64,
    pub last_ip: u64,
}

#[derive(Clone, Debug, Default)]
struct PcEntry {
    value: i32,
    variance_history: VecDeque<f64>,
}

pub struct ProposedPolicy {
    num_ways: usize,
    threshold: u64,
    history_depth: usize,
    pc_limit: i32,
    invert_feedback: bool,
    sampled: SampledSets,
    /// Current-interval counters, `sampled.count() × num_ways`.
    counters: Vec<CounterCell>,
    /// Per sampled set, the most recent `history_depth` interval snapshots.
    history: Vec<VecDeque<Box<[CounterCell]>>>,
    pc: HashMap<u64, PcEntry>,
    /// Blocks applied at the previous boundary, judged at the next one.
    pending: Vec<(u64, usize)>,
    masks: Vec<WayMask>,
}

impl ProposedPolicy {
    pub fn new(cfg: &CacheConfig) -> Self {
        let sampled = SampledSets::new(cfg);
        let slots = sampled.count();
        Self {
            num_ways: cfg.num_ways,
            threshold: cfg.threshold,
            history_depth: cfg.history_depth,
            pc_limit: cfg.pc_limit,
            invert_feedback: cfg.invert_feedback,
            sampled,
            counters: vec![CounterCell::default(); slots * cfg.num_ways],
            history: vec![VecDeque::new(); slots],
            pc: HashMap::new(),
            pending: Vec::new(),
            masks: vec![WayMask::EMPTY; cfg.num_sets],
        }
    }

    pub fn sampled_set_count(&self) -> usize {
        self.sampled.count()
    }

    pub fn sampled_sets(&self) -> &[usize] {
        self.sampled.sets()
    }

    pub fn counter_slots(&self) -> usize {
        self.counters.len()
    }

    /// Current-interval counter for a sampled set's way.
    pub fn counter(&self, set_index: usize, way: usize) -> Option<CounterCell> {
        let slot = self.sampled.slot_of(set_index)?;
        Some(self.counters[slot * self.num_ways + way])
    }

    /// Archived snapshots for a sampled set, oldest first.
    pub fn history(&self, set_index: usize) -> Option<&VecDeque<Box<[CounterCell]>>> {
        let slot = self.sampled.slot_of(set_index)?;
        Some(&self.history[slot])
    }

    /// PC-table value for an instruction pointer; absent IPs read as 0.
    pub fn pc_value(&self, ip: u64) -> i32 {
        self.pc.get(&ip).map(|e| e.value).unwrap_or(0)
    }

    /// Force a PC-table value (clamped to the configured limit). Useful
    /// for experiments that start from a trained state.
    pub fn set_pc_value(&mut self, ip: u64, value: i32) {
        let v = value.clamp(-self.pc_limit, self.pc_limit);
        self.pc.entry(ip).or_default().value = v;
    }

    pub fn variance_history(&self, ip: u64) -> Vec<f64> {
        self.pc
            .get(&ip)
            .map(|e| e.variance_history.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn pending_feedback(&self) -> &[(u64, usize)] {
        &self.pending
    }

    fn counter_row(&self, slot: usize) -> &[CounterCell] {
        &self.counters[slot * self.num_ways..(slot + 1) * self.num_ways]
    }

    /// Judge every block applied at the previous boundary against the
    /// interval that just completed, then train the blocking IPs.
    fn apply_feedback(&mut self) {
        let pending = std::mem::take(&mut self.pending);
        let mut counts = vec![0u64; self.num_ways];
        for (ip, set_index) in pending {
            let slot = self
                .sampled
                .slot_of(set_index)
                .expect("pending feedback only targets sampled sets");
            for (w, cell) in self.counter_row(slot).iter().enumerate() {
                counts[w] = cell.writes;
            }
            let v_now = population_variance(&counts);

            let entry = self.pc.entry(ip).or_default();
            entry.variance_history.push_back(v_now);
            while entry.variance_history.len() > self.history_depth {
                entry.variance_history.pop_front();
            }
            let hist: Vec<f64> = entry.variance_history.iter().copied().collect();
            let positive_impact = v_now <= weighted_mean(&hist);
            let toward_blocking = positive_impact != self.invert_feedback;
            entry.value = if toward_blocking {
                (entry.value - 1).max(-self.pc_limit)
            } else {
                (entry.value + 1).min(self.pc_limit)
            };
        }
    }
}

impl WearPolicy for ProposedPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Proposed
    }

    fn block_mask(&self, set_index: usize) -> WayMask {
        self.masks[set_index]
    }

    fn record_wear_event(&mut self, set_index: usize, way: usize, ip: u64) {
        if let Some(slot) = self.sampled.slot_of(set_index) {
            let cell = &mut self.counters[slot * self.num_ways + way];
            cell.writes += 1;
            cell.last_ip = ip;
        }
    }

    fn unsampled_write_blocked(&self, set_index: usize, ip: u64) -> bool {
        if self.sampled.contains(set_index) {
            return false;
        }
        self.pc.get(&ip).map(|e| e.value < 0).unwrap_or(false)
    }

    fn apply_lazy_block(&mut self, set_index: usize, way: usize) {
        debug_assert!(
            !self.sampled.contains(set_index),
            "lazy blocks apply only to unsampled sets"
        );
        self.masks[set_index].insert(way);
    }

    fn on_interval_boundary(&mut self) {
        // Feedback first: it must see the completed interval's counts.
        self.apply_feedback();

        // Archive the completed interval.
        for slot in 0..self.sampled.count() {
            let snapshot: Box<[CounterCell]> = self.counter_row(slot).into();
            let ring = &mut self.history[slot];
            ring.push_back(snapshot);
            while ring.len() > self.history_depth {
                ring.pop_front();
            }
        }

        // Fresh masks for sampled sets; every newly blocked way queues
        // feedback blamed on its last writer. Pending order is ascending
        // set index, then way.
        let mut counts = vec![0u64; self.num_ways];
        for slot in 0..self.sampled.count() {
            let set_index = self.sampled.sets()[slot];
            for (w, cell) in self.counter_row(slot).iter().enumerate() {
                counts[w] = cell.writes;
            }
            let mask = derive_block_mask(&counts, self.threshold);
            for way in mask.iter(self.num_ways) {
                let ip = self.counter_row(slot)[way].last_ip;
                self.pending.push((ip, set_index));
            }
            self.masks[set_index] = mask;
        }

        // Reset counters and clear the lazily accumulated unsampled masks.
        self.counters.fill(CounterCell::default());
        for (set_index, mask) in self.masks.iter_mut().enumerate() {
            if !self.sampled.contains(set_index) {
                *mask = WayMask::EMPTY;
            }
        }
    }
}
