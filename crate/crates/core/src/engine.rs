//! Trace-driven simulation engine.
//!
//! Processes access records in cycle order, fires interval boundaries,
//! routes writes around blocked ways, and accumulates metrics. Reads never
//! wear a cell; fills (including read-miss fills) and write hits do.

use thiserror::Error;

use crate::cache::{decode_address, lookup, srrip_victim, LineState, WayMask};
use crate::config::{CacheConfig, ConfigError};
use crate::metrics::{Metrics, MetricsReport};
use crate::policy::{NonePolicy, PolicyKind, ProposedPolicy, ThresholdPolicy, WearPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
}

/// One trace event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccessRecord {
    pub cycle: u64,
    pub ip: u64,
    pub addr: u64,
    pub kind: AccessKind,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("record {index}: cycle {cycle} is earlier than cycle {prev} of the previous record")]
    OutOfOrderCycle { index: u64, prev: u64, cycle: u64 },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// A single sequential simulation over one cache and one policy.
pub struct Simulator<P> {
    cfg: CacheConfig,
    policy: P,
    metrics: Metrics,
    lines: Vec<LineState>,
    next_boundary: u64,
    last_cycle: u64,
    records: u64,
}

impl<P: WearPolicy> Simulator<P> {
    pub fn new(cfg: &CacheConfig, policy: P) -> Result<Self, ConfigError> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            policy,
            metrics: Metrics::new(cfg),
            lines: vec![LineState::default(); cfg.num_sets * cfg.num_ways],
            next_boundary: cfg.interval_cycles,
            last_cycle: 0,
            records: 0,
        })
    }

    pub fn policy(&self) -> &P {
        &self.policy
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn line(&self, set_index: usize, way: usize) -> &LineState {
        &self.lines[set_index * self.cfg.num_ways + way]
    }

    pub fn set_lines(&self, set_index: usize) -> &[LineState] {
        let ways = self.cfg.num_ways;
        &self.lines[set_index * ways..(set_index + 1) * ways]
    }

    /// Process one record. Fires every interval boundary at or before the
    /// record's cycle first, oldest first.
    pub fn process(&mut self, rec: AccessRecord) -> Result<(), EngineError> {
        if self.records > 0 && rec.cycle < self.last_cycle {
            return Err(EngineError::OutOfOrderCycle {
                index: self.records,
                prev: self.last_cycle,
                cycle: rec.cycle,
            });
        }
        while rec.cycle >= self.next_boundary {
            self.fire_boundary();
            self.next_boundary += self.cfg.interval_cycles;
        }
        self.last_cycle = rec.cycle;
        self.records += 1;

        let parts = decode_address(rec.addr, &self.cfg);
        let set = parts.set_index;
        let ways = self.cfg.num_ways;
        self.metrics
            .record_access(set, rec.ip, rec.kind == AccessKind::Write);

        let base = set * ways;
        let hit_way = lookup(&self.lines[base..base + ways], parts.tag);

        match (rec.kind, hit_way) {
            (AccessKind::Read, Some(way)) => {
                // Read hits are served even from blocked ways.
                self.lines[base + way].on_hit();
                self.metrics.record_hit();
            }
            (AccessKind::Read, None) => {
                self.metrics.record_miss();
                let mask = self.policy.block_mask(set);
                self.fill(set, parts.tag, rec.ip, mask);
            }
            (AccessKind::Write, Some(way)) => {
                self.metrics.record_hit();
                if self.policy.block_mask(set).contains(way) {
                    // Blocked write hit: move the line instead of wearing
                    // the blocked cell. The old way keeps its blocked flag.
                    self.lines[base + way].invalidate();
                    self.metrics.record_blocked_hit_conversion();
                    let mask = self.policy.block_mask(set);
                    self.fill(set, parts.tag, rec.ip, mask);
                } else {
                    let line = &mut self.lines[base + way];
                    line.on_hit();
                    line.last_writer_ip = rec.ip;
                    self.wear(set, way, rec.ip, false);
                }
            }
            (AccessKind::Write, None) => {
                self.metrics.record_miss();
                let mask = self.policy.block_mask(set);
                let default_victim = srrip_victim(&mut self.lines[base..base + ways], mask);
                if self.policy.unsampled_write_blocked(set, rec.ip) {
                    // Block the way this write would have landed on for
                    // the rest of the interval and redirect.
                    self.policy.apply_lazy_block(set, default_victim);
                    self.lines[base + default_victim].blocked = true;
                    self.metrics.record_redirect();
                    let masked = mask.with(default_victim);
                    self.fill(set, parts.tag, rec.ip, masked);
                } else {
                    self.fill_at(set, default_victim, parts.tag, rec.ip, mask);
                }
            }
        }
        Ok(())
    }

    /// Finish the run: flush the final partial interval and build the report.
    pub fn finish(mut self) -> MetricsReport {
        self.fire_boundary();
        self.metrics
            .into_report(self.policy.kind(), self.last_cycle, &self.cfg)
    }

    fn fire_boundary(&mut self) {
        self.policy.on_interval_boundary();
        let ways = self.cfg.num_ways;
        for set in 0..self.cfg.num_sets {
            let mask = self.policy.block_mask(set);
            for way in 0..ways {
                self.lines[set * ways + way].blocked = mask.contains(way);
            }
        }
        self.metrics.close_interval();
    }

    fn fill(&mut self, set: usize, tag: u64, ip: u64, mask: WayMask) {
        let base = set * self.cfg.num_ways;
        let victim = srrip_victim(&mut self.lines[base..base + self.cfg.num_ways], mask);
        self.fill_at(set, victim, tag, ip, mask);
    }

    fn fill_at(&mut self, set: usize, way: usize, tag: u64, ip: u64, mask: WayMask) {
        self.lines[set * self.cfg.num_ways + way].fill(tag, ip);
        self.wear(set, way, ip, mask.contains(way));
    }

    fn wear(&mut self, set: usize, way: usize, ip: u64, fallback: bool) {
        self.metrics.record_wear(set, way, fallback);
        self.policy.record_wear_event(set, way, ip);
    }
}

/// Run a full trace through a freshly built policy of the given kind.
pub fn run_records<I>(
    cfg: &CacheConfig,
    kind: PolicyKind,
    records: I,
) -> Result<MetricsReport, EngineError>
where
    I: IntoIterator<Item = AccessRecord>,
{
    match kind {
        PolicyKind::None => run_with(cfg, NonePolicy::new(), records),
        PolicyKind::Threshold => run_with(cfg, ThresholdPolicy::new(cfg), records),
        PolicyKind::Proposed => run_with(cfg, ProposedPolicy::new(cfg), records),
    }
}

fn run_with<P, I>(cfg: &CacheConfig, policy: P, records: I) -> Result<MetricsReport, EngineError>
where
    P: WearPolicy,
    I: IntoIterator<Item = AccessRecord>,
{
    let mut sim = Simulator::new(cfg, policy)?;
    for rec in records {
        sim.process(rec)?;
    }
    Ok(sim.finish())
}
