//! Open-world attack: the target is only sometimes among the candidates.
//! Prints the calibrated threshold, AUC, EER and the ROC curve.
//!
//! ```bash
//! cargo run --release -p xvlab --example open_world_roc -- [policy] [trials]
//! ```

use xvlab::{run_experiment, ExperimentConfig, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = ExperimentConfig {
        open_world: true,
        trials: 300,
        ..ExperimentConfig::default()
    };
    if let Some(p) = args.next() {
        config.set("policy", &p)?;
    }
    if let Some(t) = args.next() {
        config.set("trials", &t)?;
    }
    let report = run_experiment(&config)?;

    let threshold = report.threshold.unwrap_or(f64::NAN);
    println!("policy {}, |S'| = {}", config.policy.strategy, config.set_size());
    println!("threshold (q = {}) = {threshold:.4}", config.threshold_percentile);
    println!("AUC = {:.4}", report.auc.unwrap_or(f64::NAN));
    if let Some(e) = report.eer {
        println!("EER = {:.4} (residual {:.4})", e.eer, e.residual);
    }
    let decided = report.records.iter().filter(|r| r.decision.as_ref().is_some_and(|d| d.present == r.present_truth()));
    println!("presence decided correctly in {}/{} trials", decided.count(), report.records.len());

    if let Some(roc) = &report.roc {
        let points = roc.points();
        let step = (points.len() / 12).max(1);
        println!("{:>6} {:>6}", "fpr", "tpr");
        for (f, t) in points.iter().step_by(step).chain(points.last()) {
            println!("{f:>6.3} {t:>6.3}");
        }
    }
    Ok(())
}
