//! Run statistics: access/hit/miss tallies, the lifetime wear map, the
//! per-interval intra-set variance series, and the final report document.
//!
//! The collector tracks sampled-set interval counters itself so that the
//! variance series exists for every policy, including the baselines that
//! keep no counters of their own.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::config::CacheConfig;
use crate::policy::{coefficient_of_variation, population_variance, PolicyKind, SampledSets};

#[derive(Clone, Copy, Debug, Default)]
struct IpCell {
    sampled: u64,
    unsampled: u64,
}

/// Running collector owned by the simulation engine.
pub struct Metrics {
    num_ways: usize,
    sampled: SampledSets,
    accesses: u64,
    hits: u64,
    misses: u64,
    writes: u64,
    wear_events: u64,
    redirected_writes: u64,
    blocked_hit_conversions: u64,
    fallback_wear_events: u64,
    wear_map: Vec<u64>,
    interval_counts: Vec<u64>,
    variance_series: Vec<Vec<f64>>,
    ip_hist: HashMap<u64, IpCell>,
}

impl Metrics {
    pub fn new(cfg: &CacheConfig) -> Self {
        let sampled = SampledSets::new(cfg);
        let slots = sampled.count();
        Self {
            num_ways: cfg.num_ways,
            sampled,
            accesses: 0,
            hits: 0,
            misses: 0,
            writes: 0,
            wear_events: 0,
            redirected_writes: 0,
            blocked_hit_conversions: 0,
            fallback_wear_events: 0,
            wear_map: vec![0; cfg.num_sets * cfg.num_ways],
            interval_counts: vec![0; slots * cfg.num_ways],
            variance_series: Vec::new(),
            ip_hist: HashMap::new(),
        }
    }

    pub fn record_access(&mut self, set_index: usize, ip: u64, is_write: bool) {
        self.accesses += 1;
        if is_write {
            self.writes += 1;
        }
        let cell = self.ip_hist.entry(ip).or_default();
        if self.sampled.contains(set_index) {
            cell.sampled += 1;
        } else {
            cell.unsampled += 1;
        }
    }

    pub fn record_hit(&mut self) {
        self.hits += 1;
    }

    pub fn record_miss(&mut self) {
        self.misses += 1;
    }

    /// One physical write to a cell. `fallback` marks a write that landed
    /// on a blocked way because every way of the set was blocked.
    pub fn record_wear(&mut self, set_index: usize, way: usize, fallback: bool) {
        self.wear_events += 1;
        self.wear_map[set_index * self.num_ways + way] += 1;
        if fallback {
            self.fallback_wear_events += 1;
        }
        if let Some(slot) = self.sampled.slot_of(set_index) {
            self.interval_counts[slot * self.num_ways + way] += 1;
        }
    }

    pub fn record_redirect(&mut self) {
        self.redirected_writes += 1;
    }

    /// A write hit on a blocked way, converted into a redirected fill.
    pub fn record_blocked_hit_conversion(&mut self) {
        self.blocked_hit_conversions += 1;
        self.redirected_writes += 1;
    }

    /// Archive the completed interval's sampled-set variances and reset
    /// the interval counters.
    pub fn close_interval(&mut self) {
        let mut row = Vec::with_capacity(self.sampled.count());
        for slot in 0..self.sampled.count() {
            let counts = &self.interval_counts[slot * self.num_ways..(slot + 1) * self.num_ways];
            row.push(population_variance(counts));
        }
        self.variance_series.push(row);
        self.interval_counts.fill(0);
    }

    pub fn wear(&self, set_index: usize, way: usize) -> u64 {
        self.wear_map[set_index * self.num_ways + way]
    }

    /// Variance rows for the intervals closed so far.
    pub fn variance_series(&self) -> &[Vec<f64>] {
        &self.variance_series
    }

    pub fn wear_events(&self) -> u64 {
        self.wear_events
    }

    pub fn accesses(&self) -> u64 {
        self.accesses
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn redirected_writes(&self) -> u64 {
        self.redirected_writes
    }

    pub fn blocked_hit_conversions(&self) -> u64 {
        self.blocked_hit_conversions
    }

    pub fn into_report(self, kind: PolicyKind, last_cycle: u64, cfg: &CacheConfig) -> MetricsReport {
        debug_assert_eq!(self.hits + self.misses, self.accesses);
        debug_assert_eq!(
            self.wear_map.iter().copied().sum::<u64>(),
            self.wear_events
        );

        let miss_ratio = if self.accesses == 0 {
            0.0
        } else {
            self.misses as f64 / self.accesses as f64
        };
        let entries: usize = self.variance_series.iter().map(|r| r.len()).sum();
        let mean_intra_set_variance = if entries == 0 {
            0.0
        } else {
            self.variance_series
                .iter()
                .flat_map(|r| r.iter())
                .sum::<f64>()
                / entries as f64
        };

        let mut ip_access_histogram: Vec<IpAccessCount> = self
            .ip_hist
            .iter()
            .map(|(&ip, c)| IpAccessCount {
                ip,
                sampled: c.sampled,
                unsampled: c.unsampled,
            })
            .collect();
        ip_access_histogram.sort_by_key(|e| e.ip);

        let wear_map: Vec<Vec<u64>> = self
            .wear_map
            .chunks(self.num_ways)
            .map(|row| row.to_vec())
            .collect();

        MetricsReport {
            policy: kind.name().to_string(),
            accesses: self.accesses,
            hits: self.hits,
            misses: self.misses,
            writes: self.writes,
            wear_events: self.wear_events,
            redirected_writes: self.redirected_writes,
            blocked_hit_conversions: self.blocked_hit_conversions,
            fallback_wear_events: self.fallback_wear_events,
            miss_ratio,
            ipc_proxy: ipc_proxy(self.accesses, self.hits, self.misses, last_cycle, cfg),
            last_cycle,
            interval_count: self.variance_series.len() as u64,
            sampled_set_count: self.sampled.count(),
            global_wear_cov: coefficient_of_variation(&self.wear_map),
            mean_intra_set_variance,
            sampled_sets: self.sampled.sets().to_vec(),
            intra_set_variance_series: self.variance_series,
            ip_access_histogram,
            wear_map,
        }
    }
}

/// Accesses per latency-weighted elapsed cycle; a relative performance
/// stand-in, not a core model.
pub fn ipc_proxy(accesses: u64, hits: u64, misses: u64, last_cycle: u64, cfg: &CacheConfig) -> f64 {
    if accesses == 0 {
        return 0.0;
    }
    let denom = last_cycle as u128
        + hits as u128 * cfg.hit_latency_cycles as u128
        + misses as u128 * cfg.miss_latency_cycles as u128;
    accesses as f64 / denom.max(1) as f64
}

/// Per-IP access counts split by sampled/unsampled destination set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpAccessCount {
    pub ip: u64,
    pub sampled: u64,
    pub unsampled: u64,
}

/// Complete result document for one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub policy: String,
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub writes: u64,
    pub wear_events: u64,
    pub redirected_writes: u64,
    pub blocked_hit_conversions: u64,
    /// Wear events that landed on a blocked way because the whole set was
    /// blocked; zero whenever at least one way stays open.
    pub fallback_wear_events: u64,
    pub miss_ratio: f64,
    pub ipc_proxy: f64,
    pub last_cycle: u64,
    pub interval_count: u64,
    pub sampled_set_count: usize,
    /// Coefficient of variation of the lifetime wear map over all cells.
    pub global_wear_cov: f64,
    /// Mean of the variance series over all (interval, sampled set) entries.
    pub mean_intra_set_variance: f64,
    /// Sampled set indices, ascending; columns of the variance series.
    pub sampled_sets: Vec<usize>,
    /// `[interval][sampled slot]` population variance of that interval's
    /// per-way write counts.
    pub intra_set_variance_series: Vec<Vec<f64>>,
    pub ip_access_histogram: Vec<IpAccessCount>,
    /// `[set][way]` lifetime wear counts.
    pub wear_map: Vec<Vec<u64>>,
}

impl MetricsReport {
    /// Mean over sampled sets of the population variance of lifetime
    /// per-way wear; the end-state wear-balance figure per set.
    pub fn mean_sampled_wear_variance(&self) -> f64 {
        if self.sampled_sets.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .sampled_sets
            .iter()
            .map(|&s| population_variance(&self.wear_map[s]))
            .sum();
        total / self.sampled_sets.len() as f64
    }

    /// `interval,set,variance` rows for the whole series.
    pub fn write_variance_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "interval,set,variance")?;
        for (interval, row) in self.intra_set_variance_series.iter().enumerate() {
            for (slot, variance) in row.iter().enumerate() {
                writeln!(w, "{},{},{}", interval, self.sampled_sets[slot], variance)?;
            }
        }
        Ok(())
    }

    /// `set,way,wear` rows for every cell.
    pub fn write_wear_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "set,way,wear")?;
        for (set, row) in self.wear_map.iter().enumerate() {
            for (way, wear) in row.iter().enumerate() {
                writeln!(w, "{set},{way},{wear}")?;
            }
        }
        Ok(())
    }
}
