//! Trace-driven set-associative last-level-cache simulator focused on NVM
//! write endurance.
//!
//! The cache array uses SRRIP replacement; wear-leveling policies block
//! heavily written ways per interval and redirect writes to colder ways.
//! The proposed policy keeps counters and history for a small sample of
//! sets and trains a PC-indexed table from variance feedback so blocking
//! decisions generalize to the remaining sets.

pub mod cache;
pub mod config;
pub mod engine;
pub mod metrics;
pub mod policy;
pub mod trace;
pub mod tracegen;

pub use cache::{decode_address, lookup, srrip_victim, AddressParts, LineState, WayMask};
pub use config::{CacheConfig, ConfigError};
pub use engine::{run_records, AccessKind, AccessRecord, EngineError, Simulator};
pub use metrics::{ipc_proxy, IpAccessCount, Metrics, MetricsReport};
pub use policy::{
    coefficient_of_variation, derive_block_mask, is_sampled_set, population_variance,
    weighted_mean, NonePolicy, PolicyKind, ProposedPolicy, SampledSets, ThresholdPolicy,
    WearPolicy,
};
pub use trace::TraceError;
pub use tracegen::{generate, SplitMix64, TraceGenerator, WorkloadError, WorkloadKind, WorkloadSpec};
