//! Output file writing. Every artifact is written to a temporary file in
//! the destination directory and renamed into place, so a failed run
//! never leaves truncated outputs behind.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;

use wearsim_core::MetricsReport;

pub fn write_atomic<F>(path: &Path, fill: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut dyn Write) -> anyhow::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    {
        let mut writer = BufWriter::new(tmp.as_file());
        fill(&mut writer)?;
        writer.flush()?;
    }
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Write metrics.json, variance.csv, and wear.csv for one run.
pub fn write_run_outputs(out_dir: &Path, report: &MetricsReport) -> anyhow::Result<()> {
    write_atomic(&out_dir.join("metrics.json"), |w| {
        serde_json::to_writer(&mut *w, report)?;
        writeln!(w)?;
        Ok(())
    })?;
    write_atomic(&out_dir.join("variance.csv"), |w| {
        report.write_variance_csv(w)?;
        Ok(())
    })?;
    write_atomic(&out_dir.join("wear.csv"), |w| {
        report.write_wear_csv(w)?;
        Ok(())
    })?;
    Ok(())
}

pub fn summary_line(report: &MetricsReport) -> String {
    format!(
        "policy={} accesses={} miss_ratio={:.6} ipc_proxy={:.6} global_wear_cov={:.6}",
        report.policy, report.accesses, report.miss_ratio, report.ipc_proxy, report.global_wear_cov
    )
}

pub const COMPARE_CSV_HEADER: &str =
    "policy,accesses,miss_ratio,ipc_proxy,mean_intra_set_variance,global_wear_cov,redirected_writes";

pub fn compare_csv_row(report: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        report.policy,
        report.accesses,
        report.miss_ratio,
        report.ipc_proxy,
        report.mean_intra_set_variance,
        report.global_wear_cov,
        report.redirected_writes
    )
}

/// Render the side-by-side comparison table for stdout.
pub fn compare_table(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>10} {:>12} {:>12} {:>16} {:>12} {:>12}\n",
        "policy",
        "accesses",
        "miss_ratio",
        "ipc_proxy",
        "mean_variance",
        "wear_cov",
        "redirects"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<10} {:>10} {:>12.6} {:>12.6} {:>16.3} {:>12.6} {:>12}\n",
            r.policy,
            r.accesses,
            r.miss_ratio,
            r.ipc_proxy,
            r.mean_intra_set_variance,
            r.global_wear_cov,
            r.redirected_writes
        ));
    }
    out
}
