//! Deterministic synthetic workload generation.
//!
//! All randomness comes from SplitMix64 (golden-ratio increment, 64-bit
//! finalizer), chosen so any implementation of the same algorithm
//! reproduces identical traces from identical specs. Zipf sampling uses
//! inverse-CDF binary search over an ascending cumulative weight table;
//! block ids scatter ranks across sets with a fixed odd multiplier.
//!
//! Three workload kinds:
//! - `hot_way`: one instruction pointer writes a slowly rotating
//!   two-block window of one set, concentrating wear on few ways.
//! - `hot_set`: round-robin writes over `num_ways` blocks of one set,
//!   heavy and uniform.
//! - `zipf_mixed`: reads and writes over a block universe spanning all
//!   sets, Zipf-skewed addresses, and a small pool of write-dominant
//!   instruction pointers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CacheConfig, ConfigError};
use crate::engine::{AccessKind, AccessRecord};

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then finalize with the
/// standard 30/27/31 xor-shift multiply mixer.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    HotWay,
    HotSet,
    ZipfMixed,
}

impl std::str::FromStr for WorkloadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hot_way" | "hot-way" => Ok(WorkloadKind::HotWay),
            "hot_set" | "hot-set" => Ok(WorkloadKind::HotSet),
            "zipf_mixed" | "zipf-mixed" => Ok(WorkloadKind::ZipfMixed),
            other => Err(format!(
                "unknown workload kind '{other}' (expected hot_way, hot_set, or zipf_mixed)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub num_records: u64,
    pub seed: u64,
    /// Zipf skew exponent (zipf_mixed only).
    pub zipf_s: f64,
    /// Number of distinct write-dominant instruction pointers.
    pub hot_ip_count: usize,
    /// Fraction of zipf_mixed records that are writes.
    pub write_fraction: f64,
    /// Focus set for hot_way/hot_set; defaults to set 0.
    pub target_set: Option<usize>,
    /// Cycles between consecutive records.
    pub cycle_stride: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            kind: WorkloadKind::ZipfMixed,
            num_records: 100_000,
            seed: 0,
            zipf_s: 1.1,
            hot_ip_count: 8,
            write_fraction: 0.7,
            target_set: None,
            cycle_stride: 1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("num_records must be at least 1")]
    NoRecords,
    #[error("write_fraction must lie in [0, 1], got {0}")]
    BadWriteFraction(f64),
    #[error("zipf_s must be positive and finite, got {0}")]
    BadZipfExponent(f64),
    #[error("cycle_stride must be at least 1")]
    BadStride,
    #[error("hot_ip_count must be at least 1")]
    NoHotIps,
    #[error("target_set {target} out of range for {num_sets} sets")]
    TargetSetOutOfRange { target: usize, num_sets: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

const HOT_IP_BASE: u64 = 0x40_0000;
const COLD_IP_BASE: u64 = 0x80_0000;
const COLD_IP_SPREAD: u64 = 4096;
/// Odd multiplier mapping Zipf ranks onto block ids, spreading hot ranks
/// over the whole set space.
const BLOCK_SCATTER: u64 = 0x9E37_79B9_7F4A_7C15;
/// Probability that a write's instruction pointer comes from the hot pool
/// (and that a read's does not).
const HOT_IP_BIAS: f64 = 0.75;
/// hot_way advances its two-block window every this many records.
const HOT_WAY_ROTATION: u64 = 64;

/// Blocks per set in the zipf_mixed universe: 4x the ways guarantees
/// capacity pressure.
pub const ZIPF_BLOCKS_PER_SET: usize = 4;

enum Inner {
    HotWay {
        set_index: u64,
        ip: u64,
        tag_universe: u64,
    },
    HotSet {
        set_index: u64,
        num_ways: u64,
        hot_ip_count: u64,
    },
    ZipfMixed {
        rng: SplitMix64,
        cumulative: Vec<f64>,
        total: f64,
        universe_mask: u64,
        write_fraction: f64,
        hot_ip_count: u64,
    },
}

/// Iterator over the generated records of one workload.
pub struct TraceGenerator {
    remaining: u64,
    index: u64,
    stride: u64,
    set_bits: u32,
    offset_bits: u32,
    inner: Inner,
}

/// Build the record stream for `spec` against the cache geometry in `cfg`.
pub fn generate(spec: &WorkloadSpec, cfg: &CacheConfig) -> Result<TraceGenerator, WorkloadError> {
    cfg.validate()?;
    if spec.num_records == 0 {
        return Err(WorkloadError::NoRecords);
    }
    if !(spec.write_fraction >= 0.0 && spec.write_fraction <= 1.0) {
        return Err(WorkloadError::BadWriteFraction(spec.write_fraction));
    }
    if !(spec.zipf_s > 0.0 && spec.zipf_s.is_finite()) {
        return Err(WorkloadError::BadZipfExponent(spec.zipf_s));
    }
    if spec.cycle_stride == 0 {
        return Err(WorkloadError::BadStride);
    }
    if spec.hot_ip_count == 0 {
        return Err(WorkloadError::NoHotIps);
    }
    let target_set = spec.target_set.unwrap_or(0);
    if target_set >= cfg.num_sets {
        return Err(WorkloadError::TargetSetOutOfRange {
            target: target_set,
            num_sets: cfg.num_sets,
        });
    }

    let mut rng = SplitMix64::new(spec.seed);
    let inner = match spec.kind {
        WorkloadKind::HotWay => Inner::HotWay {
            set_index: target_set as u64,
            ip: HOT_IP_BASE + (rng.next_u64() % COLD_IP_SPREAD) * 16,
            tag_universe: cfg.num_ways as u64 * 4,
        },
        WorkloadKind::HotSet => Inner::HotSet {
            set_index: target_set as u64,
            num_ways: cfg.num_ways as u64,
            hot_ip_count: spec.hot_ip_count as u64,
        },
        WorkloadKind::ZipfMixed => {
            let universe = cfg.num_sets * cfg.num_ways * ZIPF_BLOCKS_PER_SET;
            let mut cumulative = Vec::with_capacity(universe);
            let mut total = 0.0f64;
            for rank in 1..=universe {
                total += (rank as f64).powf(-spec.zipf_s);
                cumulative.push(total);
            }
            Inner::ZipfMixed {
                rng,
                cumulative,
                total,
                universe_mask: universe as u64 - 1,
                write_fraction: spec.write_fraction,
                hot_ip_count: spec.hot_ip_count as u64,
            }
        }
    };
    Ok(TraceGenerator {
        remaining: spec.num_records,
        index: 0,
        stride: spec.cycle_stride,
        set_bits: cfg.set_index_bits(),
        offset_bits: cfg.block_offset_bits(),
        inner,
    })
}

impl Iterator for TraceGenerator {
    type Item = AccessRecord;

    fn next(&mut self) -> Option<AccessRecord> {
        if self.remaining == 0 {
            return None;
        }
        let i = self.index;
        let cycle = (i + 1) * self.stride;
        let rec = match &mut self.inner {
            Inner::HotWay { set_index, ip, tag_universe } => {
                let window = i / HOT_WAY_ROTATION;
                let tag = (window + (i & 1)) % *tag_universe;
                AccessRecord {
                    cycle,
                    ip: *ip,
                    addr: ((tag << self.set_bits) | *set_index) << self.offset_bits,
                    kind: AccessKind::Write,
                }
            }
            Inner::HotSet { set_index, num_ways, hot_ip_count } => AccessRecord {
                cycle,
                ip: HOT_IP_BASE + (i % *hot_ip_count) * 16,
                addr: ((i % *num_ways) << self.set_bits | *set_index) << self.offset_bits,
                kind: AccessKind::Write,
            },
            Inner::ZipfMixed {
                rng,
                cumulative,
                total,
                universe_mask,
                write_fraction,
                hot_ip_count,
            } => {
                // Fixed draw order: address, kind, pool, pool index.
                let target = rng.next_f64() * *total;
                let rank = cumulative
                    .partition_point(|&c| c <= target)
                    .min(cumulative.len() - 1);
                let block = (rank as u64).wrapping_mul(BLOCK_SCATTER) & *universe_mask;

                let is_write = rng.next_f64() < *write_fraction;
                let hot_pool = if is_write {
                    rng.next_f64() < HOT_IP_BIAS
                } else {
                    rng.next_f64() >= HOT_IP_BIAS
                };
                let pick = rng.next_u64();
                let ip = if hot_pool {
                    HOT_IP_BASE + (pick % *hot_ip_count) * 16
                } else {
                    COLD_IP_BASE + (pick % COLD_IP_SPREAD) * 16
                };
                AccessRecord {
                    cycle,
                    ip,
                    addr: block << self.offset_bits,
                    kind: if is_write { AccessKind::Write } else { AccessKind::Read },
                }
            }
        };
        self.index += 1;
        self.remaining -= 1;
        Some(rec)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for TraceGenerator {}
