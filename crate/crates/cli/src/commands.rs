//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use wearsim_core::{
    generate, run_records, trace, AccessRecord, CacheConfig, MetricsReport, PolicyKind,
    WorkloadKind, WorkloadSpec,
};

use crate::config_file::RunConfigFile;
use crate::output;

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    #[value(name = "hot_way")]
    HotWay,
    #[value(name = "hot_set")]
    HotSet,
    #[value(name = "zipf_mixed")]
    ZipfMixed,
}

impl From<KindArg> for WorkloadKind {
    fn from(k: KindArg) -> WorkloadKind {
        match k {
            KindArg::HotWay => WorkloadKind::HotWay,
            KindArg::HotSet => WorkloadKind::HotSet,
            KindArg::ZipfMixed => WorkloadKind::ZipfMixed,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Workload kind
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Number of records to generate
    #[arg(long, default_value_t = 100_000)]
    records: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output trace path
    #[arg(long)]
    out: PathBuf,
    /// Focus set for hot_way/hot_set
    #[arg(long)]
    target_set: Option<usize>,
    /// Zipf skew exponent (zipf_mixed)
    #[arg(long, default_value_t = 1.1)]
    zipf_s: f64,
    /// Distinct write-dominant instruction pointers
    #[arg(long, default_value_t = 8)]
    hot_ips: usize,
    /// Write fraction for zipf_mixed
    #[arg(long, default_value_t = 0.7)]
    write_fraction: f64,
    /// Cycles between records
    #[arg(long, default_value_t = 1)]
    stride: u64,
    /// Config file supplying the cache geometry
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let file = load_config(args.config.as_deref())?;
    let cfg = file.cache;
    let spec = WorkloadSpec {
        kind: args.kind.into(),
        num_records: args.records,
        seed: args.seed,
        zipf_s: args.zipf_s,
        hot_ip_count: args.hot_ips,
        write_fraction: args.write_fraction,
        target_set: args.target_set,
        cycle_stride: args.stride,
    };
    let records = generate(&spec, &cfg)?;
    let mut count = 0;
    output::write_atomic(&args.out, |w| {
        count = trace::write_records(w, records)?;
        Ok(())
    })?;
    println!("wrote {} records to {}", count, args.out.display());
    Ok(())
}

/// Flags shared by run/compare/sweep; values override the config file.
#[derive(Args, Debug)]
pub struct SimArgs {
    /// Run configuration file (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input trace path
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Blocking threshold override
    #[arg(long)]
    threshold: Option<u64>,
    /// Interval length override (cycles)
    #[arg(long)]
    interval: Option<u64>,
    /// Seed override for an inline workload
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Wear policy: none, threshold, or proposed
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Policies to compare
    #[arg(long, value_parser = parse_policy, value_delimiter = ',',
          default_value = "none,threshold,proposed")]
    policies: Vec<PolicyKind>,
    /// Parallel simulations (default: one per policy)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SweepParam {
    #[value(name = "threshold")]
    Threshold,
    #[value(name = "interval_cycles")]
    IntervalCycles,
    #[value(name = "pc_limit")]
    PcLimit,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Threshold => "threshold",
            SweepParam::IntervalCycles => "interval_cycles",
            SweepParam::PcLimit => "pc_limit",
        }
    }

    fn apply(self, cfg: &CacheConfig, value: u64) -> anyhow::Result<CacheConfig> {
        let mut cfg = cfg.clone();
        match self {
            SweepParam::Threshold => cfg.threshold = value,
            SweepParam::IntervalCycles => cfg.interval_cycles = value,
            SweepParam::PcLimit => {
                cfg.pc_limit = i32::try_from(value).context("pc_limit value out of range")?
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Parameter to sweep
    #[arg(long, value_enum)]
    param: SweepParam,
    /// Values to sweep over
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    values: Vec<u64>,
    /// Wear policy: none, threshold, or proposed
    #[arg(long, value_parser = parse_policy)]
    policy: Option<PolicyKind>,
    /// Parallel simulations (default: one per value)
    #[arg(long)]
    jobs: Option<usize>,
}

struct ResolvedSim {
    cfg: CacheConfig,
    policy: PolicyKind,
    out_dir: PathBuf,
    records: Vec<AccessRecord>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfigFile> {
    match path {
        Some(p) => RunConfigFile::load(p),
        None => Ok(RunConfigFile::default()),
    }
}

fn resolve(sim: &SimArgs, policy_flag: Option<PolicyKind>) -> anyhow::Result<ResolvedSim> {
    let file = load_config(sim.config.as_deref())?;
    let mut cfg = file.cache;
    if let Some(t) = sim.threshold {
        cfg.threshold = t;
    }
    if let Some(i) = sim.interval {
        cfg.interval_cycles = i;
    }
    cfg.validate()?;

    let trace_path = sim.trace.clone().or(file.trace);
    let records = match (trace_path, file.workload) {
        (Some(path), None) => trace::read_records_from_path(&path)
            .with_context(|| format!("reading trace {}", path.display()))?,
        (Some(path), Some(_)) if sim.trace.is_some() => trace::read_records_from_path(&path)
            .with_context(|| format!("reading trace {}", path.display()))?,
        (Some(_), Some(_)) => {
            bail!("config file provides both a trace path and an inline workload; keep one")
        }
        (None, Some(mut workload)) => {
            if let Some(seed) = sim.seed {
                workload.seed = seed;
            }
            generate(&workload, &cfg)?.collect()
        }
        (None, None) => bail!("no trace input: pass --trace or add a workload to the config file"),
    };

    Ok(ResolvedSim {
        cfg,
        policy: policy_flag.unwrap_or(file.policy),
        out_dir: sim.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
        records,
    })
}

fn thread_pool(jobs: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    builder.build().context("building thread pool")
}

pub fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let resolved = resolve(&args.sim, args.policy)?;
    let report = run_records(
        &resolved.cfg,
        resolved.policy,
        resolved.records.iter().copied(),
    )?;
    output::write_run_outputs(&resolved.out_dir, &report)?;
    println!("{}", output::summary_line(&report));
    Ok(())
}

pub fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    if args.policies.is_empty() {
        bail!("--policies must name at least one policy");
    }
    let resolved = resolve(&args.sim, None)?;
    let pool = thread_pool(args.jobs)?;
    let reports: Vec<MetricsReport> = pool.install(|| {
        args.policies
            .par_iter()
            .map(|&kind| run_records(&resolved.cfg, kind, resolved.records.iter().copied()))
            .collect::<Result<_, _>>()
    })?;

    print!("{}", output::compare_table(&reports));
    output::write_atomic(&resolved.out_dir.join("compare.csv"), |w| {
        writeln!(w, "{}", output::COMPARE_CSV_HEADER)?;
        for report in &reports {
            writeln!(w, "{}", output::compare_csv_row(report))?;
        }
        Ok(())
    })?;
    Ok(())
}

pub fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let resolved = resolve(&args.sim, args.policy)?;
    let configs: Vec<(u64, CacheConfig)> = args
        .values
        .iter()
        .map(|&v| Ok((v, args.param.apply(&resolved.cfg, v)?)))
        .collect::<anyhow::Result<_>>()?;

    let pool = thread_pool(args.jobs)?;
    let reports: Vec<(u64, MetricsReport)> = pool.install(|| {
        configs
            .par_iter()
            .map(|(value, cfg)| {
                run_records(cfg, resolved.policy, resolved.records.iter().copied())
                    .map(|r| (*value, r))
            })
            .collect::<Result<_, _>>()
    })?;

    let param = args.param.name();
    for (value, report) in &reports {
        println!("{param}={value} {}", output::summary_line(report));
    }
    output::write_atomic(&resolved.out_dir.join("sweep.csv"), |w| {
        writeln!(w, "param,value,{}", output::COMPARE_CSV_HEADER)?;
        for (value, report) in &reports {
            writeln!(w, "{param},{value},{}", output::compare_csv_row(report))?;
        }
        Ok(())
    })?;
    Ok(())
}
