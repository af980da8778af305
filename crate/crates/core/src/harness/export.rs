//! CSV report export.
//!
//! All files use `,` separators, `\n` line endings and a header row. Floats
//! are written in Rust's shortest round-trip form, so re-reading them gives
//! back the exact values. Wall-clock time is not written; identical configs
//! produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentReport, SweepRow};
use crate::error::{Error, Result};
use crate::metrics::Summary;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const ROC_FILE: &str = "roc.csv";
pub const CONFIG_ECHO_FILE: &str = "config.echo";
pub const SWEEP_FILE: &str = "sweep.csv";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn summary_fields(s: Option<Summary>) -> [String; 3] {
    [opt(s.map(|s| s.mean)), opt(s.map(|s| s.p50)), opt(s.map(|s| s.p95))]
}

pub fn summary_csv(report: &ExperimentReport) -> String {
    let c = &report.config;
    let mut row = vec![
        c.policy.strategy.to_string(),
        c.knowledge.to_string(),
        c.open_world.to_string(),
        report.records.len().to_string(),
        c.set_size().to_string(),
        c.replications.to_string(),
        c.seed.to_string(),
        opt(report.accuracy),
        opt(report.naive_accuracy),
        opt(report.auc),
        opt(report.eer.map(|e| e.eer)),
        opt(report.eer.map(|e| e.residual)),
        opt(report.threshold),
    ];
    row.extend(summary_fields(report.true_distance));
    row.extend(summary_fields(report.false_distance));
    row.push(opt(report.utility.map(|s| s.mean)));
    row.push(opt(report.utility.map(|s| s.std)));
    format!(
        "policy,knowledge,open_world,trials,set_size,replications,seed,accuracy,naive_accuracy,auc,eer,eer_residual,threshold,\
true_dist_mean,true_dist_p50,true_dist_p95,false_dist_mean,false_dist_p50,false_dist_p95,utility_mean,utility_std\n{}\n",
        row.join(",")
    )
}

/// One row per evaluation trial. `truth` is empty when the target was absent
/// and `present_decision` is empty in closed-world runs.
pub fn trials_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("trial_id,truth,predicted,min_distance,present_truth,present_decision\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.trial_id,
            r.truth.as_deref().unwrap_or(""),
            r.outcome.predicted_id,
            r.outcome.min_distance,
            r.present_truth(),
            r.decision.as_ref().map(|d| d.present.to_string()).unwrap_or_default()
        );
    }
    out
}

pub fn roc_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("fpr,tpr\n");
    if let Some(roc) = &report.roc {
        for (f, t) in roc.points() {
            let _ = writeln!(out, "{f},{t}");
        }
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("set_size,accuracy,trials\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.set_size, r.accuracy, r.trials);
    }
    out
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `summary.csv`, `trials.csv`, `roc.csv` and `config.echo` into `dir`.
pub fn export_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![
        write_file(dir, SUMMARY_FILE, &summary_csv(report))?,
        write_file(dir, TRIALS_FILE, &trials_csv(report))?,
        write_file(dir, ROC_FILE, &roc_csv(report))?,
        write_file(dir, CONFIG_ECHO_FILE, &report.config.to_config_text())?,
    ])
}

pub fn export_sweep(rows: &[SweepRow], config: &super::ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![
        write_file(dir, SWEEP_FILE, &sweep_csv(rows))?,
        write_file(dir, CONFIG_ECHO_FILE, &config.to_config_text())?,
    ])
}
