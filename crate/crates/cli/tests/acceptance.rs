//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured values. Run with
//! `cargo test -p wearsim --test acceptance -- --nocapture` to see them.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use wearsim_core::{
    generate, is_sampled_set, population_variance, run_records, srrip_victim, weighted_mean,
    AccessKind, AccessRecord, CacheConfig, LineState, MetricsReport, PolicyKind, ProposedPolicy,
    Simulator, SplitMix64, ThresholdPolicy, WayMask, WearPolicy, WorkloadKind, WorkloadSpec,
};

const BIN: &str = env!("CARGO_BIN_EXE_wearsim");

fn write_rec(cycle: u64, ip: u64, addr: u64) -> AccessRecord {
    AccessRecord { cycle, ip, addr, kind: AccessKind::Write }
}

fn addr_of(cfg: &CacheConfig, set: usize, tag: u64) -> u64 {
    ((tag << cfg.set_index_bits()) | set as u64) << cfg.block_offset_bits()
}

// ---------------------------------------------------------------------------
// Criterion 1: sampler exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_sampler_selects_exactly_32_sets() {
    let cfg = CacheConfig::default();
    let start = Instant::now();
    let count = (0..cfg.num_sets)
        .filter(|&s| is_sampled_set(s, &cfg))
        .count();
    let elapsed = start.elapsed();
    assert_eq!(count, 32);
    assert!(
        elapsed < Duration::from_millis(1),
        "enumeration took {elapsed:?}"
    );
    println!("PASS criterion 1: sampler exactness — {count} sampled sets in {elapsed:?}");
}

// ---------------------------------------------------------------------------
// Criterion 2: threshold-only oscillation on a hot set
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_threshold_only_blocking_oscillates() {
    let start = Instant::now();
    // 2000-cycle intervals with one record per cycle: 125 writes per way
    // per interval, more than 3x the threshold of 29. 12 intervals.
    let cfg = CacheConfig {
        interval_cycles: 2_000,
        ..CacheConfig::default()
    };
    let intervals = 12u64;
    let spec = WorkloadSpec {
        kind: WorkloadKind::HotSet,
        // One record per cycle; stop one short so the final record does
        // not open a 13th interval.
        num_records: intervals * cfg.interval_cycles - 1,
        seed: 5,
        target_set: Some(0),
        ..WorkloadSpec::default()
    };
    let records: Vec<AccessRecord> = generate(&spec, &cfg).unwrap().collect();

    let mut sim = Simulator::new(&cfg, ThresholdPolicy::new(&cfg)).unwrap();
    // masks[t] = block mask of the hot set in force during interval t.
    let mut masks: Vec<WayMask> = vec![WayMask::EMPTY];
    for rec in records {
        let interval = (rec.cycle / cfg.interval_cycles) as usize;
        sim.process(rec).unwrap();
        if interval == masks.len() {
            masks.push(sim.policy().block_mask(0));
        }
    }
    assert_eq!(masks.len(), intervals as usize);

    // Ways that actually received writes during the run.
    let hot_ways: u64 = (0..cfg.num_ways)
        .filter(|&w| sim.metrics().wear(0, w) > 0)
        .fold(0, |acc, w| acc | (1 << w));

    let mut pairs = 0;
    let mut oscillating = 0;
    for t in 3..masks.len() - 2 {
        pairs += 1;
        let period_two = masks[t + 2] == masks[t];
        let complement = masks[t + 1].bits() == hot_ways & !masks[t].bits();
        if period_two && complement {
            oscillating += 1;
        }
    }
    let fraction = oscillating as f64 / pairs as f64;
    let elapsed = start.elapsed();
    assert!(
        fraction >= 0.70,
        "only {oscillating}/{pairs} interval pairs oscillate"
    );
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "PASS criterion 2: oscillation pathology — {oscillating}/{pairs} pairs \
         ({:.0}%) alternate, {elapsed:?}",
        fraction * 100.0
    );
}

// ---------------------------------------------------------------------------
// Criteria 3 & 4 share three seeded zipf_mixed comparisons
// ---------------------------------------------------------------------------

struct ZipfComparison {
    seed: u64,
    none: MetricsReport,
    proposed: MetricsReport,
}

struct ZipfRuns {
    comparisons: Vec<ZipfComparison>,
    elapsed: Duration,
}

fn zipf_runs() -> &'static ZipfRuns {
    static RUNS: OnceLock<ZipfRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let cfg = CacheConfig::default();
        let comparisons = [1u64, 2, 3]
            .iter()
            .map(|&seed| {
                let spec = WorkloadSpec {
                    kind: WorkloadKind::ZipfMixed,
                    num_records: 1_000_000,
                    seed,
                    ..WorkloadSpec::default()
                };
                let records: Vec<AccessRecord> = generate(&spec, &cfg).unwrap().collect();
                let none = run_records(&cfg, PolicyKind::None, records.iter().copied()).unwrap();
                let proposed =
                    run_records(&cfg, PolicyKind::Proposed, records.iter().copied()).unwrap();
                ZipfComparison { seed, none, proposed }
            })
            .collect();
        ZipfRuns { comparisons, elapsed: start.elapsed() }
    })
}

#[test]
fn criterion_03_proposed_policy_reduces_wear_variance() {
    let runs = zipf_runs();
    for cmp in &runs.comparisons {
        let none_var = cmp.none.mean_sampled_wear_variance();
        let prop_var = cmp.proposed.mean_sampled_wear_variance();
        assert!(
            prop_var < none_var,
            "seed {}: sampled wear variance {prop_var} not below {none_var}",
            cmp.seed
        );
        assert!(
            cmp.proposed.global_wear_cov < cmp.none.global_wear_cov,
            "seed {}: wear CoV {} not below {}",
            cmp.seed,
            cmp.proposed.global_wear_cov,
            cmp.none.global_wear_cov
        );
    }
    assert!(
        runs.elapsed < Duration::from_secs(60),
        "zipf runs took {:?}",
        runs.elapsed
    );
    let c = &runs.comparisons[0];
    println!(
        "PASS criterion 3: variance reduction — seed 1 sampled wear variance \
         {:.0} → {:.0}, global CoV {:.2} → {:.2}, 6 runs in {:?}",
        c.none.mean_sampled_wear_variance(),
        c.proposed.mean_sampled_wear_variance(),
        c.none.global_wear_cov,
        c.proposed.global_wear_cov,
        runs.elapsed
    );
}

#[test]
fn criterion_04_proposed_policy_does_not_regress_performance() {
    let runs = zipf_runs();
    for cmp in &runs.comparisons {
        assert!(
            cmp.proposed.miss_ratio <= cmp.none.miss_ratio + 0.02,
            "seed {}: miss ratio {} vs {}",
            cmp.seed,
            cmp.proposed.miss_ratio,
            cmp.none.miss_ratio
        );
        assert!(
            cmp.proposed.ipc_proxy >= 0.98 * cmp.none.ipc_proxy,
            "seed {}: ipc proxy {} vs {}",
            cmp.seed,
            cmp.proposed.ipc_proxy,
            cmp.none.ipc_proxy
        );
    }
    let c = &runs.comparisons[0];
    println!(
        "PASS criterion 4: performance non-regression — seed 1 miss ratio \
         {:.6} → {:.6}, ipc proxy ratio {:.5}",
        c.none.miss_ratio,
        c.proposed.miss_ratio,
        c.proposed.ipc_proxy / c.none.ipc_proxy
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: variance and weighted-mean oracles
// ---------------------------------------------------------------------------

/// Two-pass oracle, exact for integer counts: pass one accumulates the
/// sum, pass two the squared deviations of n-scaled values, so the result
/// is Σ(n·c − S)² / n³ with an integer numerator.
fn two_pass_variance(counts: &[u64]) -> f64 {
    let n = counts.len() as i128;
    let sum: i128 = counts.iter().map(|&c| c as i128).sum();
    let scaled_sq_dev: i128 = counts
        .iter()
        .map(|&c| {
            let d = n * c as i128 - sum;
            d * d
        })
        .sum();
    scaled_sq_dev as f64 / (n * n * n) as f64
}

#[test]
fn criterion_05_math_matches_independent_oracles() {
    let mut rng = SplitMix64::new(0xACCE97);
    let mut max_var_err = 0.0f64;
    for _ in 0..10_000 {
        let len = (rng.next_u64() % 16 + 1) as usize;
        let counts: Vec<u64> = (0..len).map(|_| rng.next_u64() % 1_000_001).collect();
        let err = (population_variance(&counts) - two_pass_variance(&counts)).abs();
        max_var_err = max_var_err.max(err);
    }
    assert!(max_var_err <= 1e-9, "max variance error {max_var_err}");

    let mut max_wm_err = 0.0f64;
    for _ in 0..10_000 {
        let len = (rng.next_u64() % 8 + 1) as usize;
        let values: Vec<f64> = (0..len).map(|_| rng.next_f64() * 1e6).collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &v) in values.iter().enumerate() {
            num += (i + 1) as f64 * v;
            den += (i + 1) as f64;
        }
        let err = (weighted_mean(&values) - num / den).abs();
        max_wm_err = max_wm_err.max(err);
    }
    assert!(max_wm_err <= 1e-12, "max weighted-mean error {max_wm_err}");
    println!(
        "PASS criterion 5: oracles — variance err ≤ {max_var_err:e}, \
         weighted mean err ≤ {max_wm_err:e} over 10^4 cases each"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: replacement safety
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_victim_selection_respects_masks() {
    let mut rng = SplitMix64::new(0x5EED);
    let cases = 100_000;
    for _ in 0..cases {
        let mut set = vec![LineState::default(); 16];
        for (w, line) in set.iter_mut().enumerate() {
            line.valid = rng.next_u64().is_multiple_of(2);
            line.tag = w as u64;
            line.rrpv = (rng.next_u64() % 4) as u8;
        }
        let mask = WayMask::from_bits(rng.next_u64() & 0xFFFF);
        let victim = srrip_victim(&mut set, mask);
        assert!(victim < 16);
        if !mask.is_full(16) {
            assert!(!mask.contains(victim), "victim {victim} in mask {mask:?}");
        }
    }
    println!("PASS criterion 6: replacement safety — {cases} randomized cases");
}

// ---------------------------------------------------------------------------
// Criterion 7: conservation
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_conservation_holds_across_policies_and_workloads() {
    let mut checked = 0;
    let assert_conserved = |report: &MetricsReport, label: &str| {
        assert_eq!(report.hits + report.misses, report.accesses, "{label}");
        assert_eq!(
            report.wear_map.iter().flatten().sum::<u64>(),
            report.wear_events,
            "{label}"
        );
    };
    for cmp in &zipf_runs().comparisons {
        assert_conserved(&cmp.none, "zipf none");
        assert_conserved(&cmp.proposed, "zipf proposed");
        checked += 2;
    }
    let cfg = CacheConfig {
        interval_cycles: 1_000,
        ..CacheConfig::default()
    };
    for kind in PolicyKind::ALL {
        for wl in [WorkloadKind::HotWay, WorkloadKind::HotSet] {
            let spec = WorkloadSpec {
                kind: wl,
                num_records: 20_000,
                seed: 9,
                ..WorkloadSpec::default()
            };
            let records = generate(&spec, &cfg).unwrap();
            let report = run_records(&cfg, kind, records).unwrap();
            assert_conserved(&report, kind.name());
            checked += 1;
        }
    }
    println!("PASS criterion 7: conservation — {checked} runs, exact");
}

// ---------------------------------------------------------------------------
// Criterion 8: blocking efficacy at micro scale
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_blocked_way_receives_no_wear_next_interval() {
    // One set, 16 ways, threshold 29. Way 0 takes 30 writes in the first
    // interval, is blocked, and must gain zero wear in the second while
    // every write still lands somewhere.
    let cfg = CacheConfig {
        num_sets: 1,
        num_ways: 16,
        sample_bits: 0,
        threshold: 29,
        interval_cycles: 100,
        ..CacheConfig::default()
    };
    let mut sim = Simulator::new(&cfg, ProposedPolicy::new(&cfg)).unwrap();

    // Interval 1: 30 writes to one block (tag 5) by IP 0xAA.
    for i in 0..30u64 {
        sim.process(write_rec(i + 1, 0xAA, addr_of(&cfg, 0, 5))).unwrap();
    }
    assert_eq!(sim.metrics().wear(0, 0), 30);
    let wear_before: Vec<u64> = (0..16).map(|w| sim.metrics().wear(0, w)).collect();

    // Interval 2: 30 more writes to the same block plus a second block.
    for i in 0..30u64 {
        let tag = if i % 2 == 0 { 5 } else { 6 };
        sim.process(write_rec(100 + i, 0xAB, addr_of(&cfg, 0, tag))).unwrap();
    }
    assert!(sim.policy().block_mask(0).contains(0), "way 0 not blocked");
    let wear_after: Vec<u64> = (0..16).map(|w| sim.metrics().wear(0, w)).collect();

    assert_eq!(wear_after[0], wear_before[0], "blocked way 0 wore");
    let total_before: u64 = wear_before.iter().sum();
    let total_after: u64 = wear_after.iter().sum();
    assert_eq!(total_after - total_before, 30, "interval 2 writes not conserved");

    let report = sim.finish();
    assert_eq!(report.wear_events, 60);
    assert_eq!(report.fallback_wear_events, 0);
    println!(
        "PASS criterion 8: micro blocking efficacy — way 0 wear froze at \
         {} while 30 writes moved to other ways",
        wear_after[0]
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: PC-table learning
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_pc_table_learns_blocking_ip() {
    let cfg = CacheConfig {
        interval_cycles: 1_000,
        ..CacheConfig::default()
    };
    let hot_ip = 0x4444;
    let control_ip = 0x2222;
    let sampled_set = 0;
    let unsampled_set = 1;
    assert!(is_sampled_set(sampled_set, &cfg));
    assert!(!is_sampled_set(unsampled_set, &cfg));

    // Per interval: the hot IP writes one block of sampled set 0 a
    // hundred times; the control IP writes two blocks of an unsampled
    // set, well under the threshold.
    let mut records = Vec::new();
    for interval in 0..6u64 {
        let base = interval * cfg.interval_cycles;
        for i in 0..100 {
            records.push(write_rec(base + i + 1, hot_ip, addr_of(&cfg, sampled_set, 7)));
        }
        for i in 0..10 {
            records.push(write_rec(
                base + 200 + i,
                control_ip,
                addr_of(&cfg, unsampled_set, i % 2),
            ));
        }
    }

    let mut sim = Simulator::new(&cfg, ProposedPolicy::new(&cfg)).unwrap();
    let mut boundaries = 0u32;
    let mut negative_at = None;
    let mut prev_interval = 0;
    for rec in records {
        let interval = rec.cycle / cfg.interval_cycles;
        if interval > prev_interval {
            boundaries += interval as u32 - prev_interval as u32;
            prev_interval = interval;
        }
        sim.process(rec).unwrap();
        if negative_at.is_none() && sim.policy().pc_value(hot_ip) < 0 {
            negative_at = Some(boundaries);
        }
    }
    let negative_at = negative_at.expect("hot IP never trained negative");
    assert!(
        negative_at <= 5,
        "hot IP went negative only after {negative_at} boundaries"
    );
    assert_eq!(sim.policy().pc_value(control_ip), 0, "control IP drifted");
    println!(
        "PASS criterion 9: PC-table learning — hot IP negative after \
         {negative_at} boundaries, control IP still 0"
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_cli_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    let gen = Command::new(BIN)
        .args([
            "gen",
            "--kind",
            "zipf_mixed",
            "--records",
            "50000",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&trace)
        .output()
        .unwrap();
    assert!(gen.status.success(), "{gen:?}");

    let run = |out: &Path| {
        let st = Command::new(BIN)
            .args(["run", "--policy", "proposed", "--trace"])
            .arg(&trace)
            .arg("--out-dir")
            .arg(out)
            .output()
            .unwrap();
        assert!(st.status.success(), "{st:?}");
        std::fs::read(out.join("metrics.json")).unwrap()
    };
    let a = run(&dir.path().join("out1"));
    let b = run(&dir.path().join("out2"));
    assert!(!a.is_empty());
    assert_eq!(a, b, "metrics JSON differs between identical runs");
    println!(
        "PASS criterion 10: determinism — two CLI runs produced identical \
         {}-byte metrics JSON",
        a.len()
    );
}
