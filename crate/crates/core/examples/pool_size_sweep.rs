//! Attack accuracy as the attacker's candidate set S' grows, under
//! Different knowledge.
//!
//! ```bash
//! cargo run --release -p xvlab --example pool_size_sweep -- [trials] [policy]
//! ```

use xvlab::{sweep_pool_size, ExperimentConfig, KnowledgeLevel, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let mut config = ExperimentConfig {
        knowledge: KnowledgeLevel::Different,
        trials: 100,
        replications: 8,
        ..ExperimentConfig::default()
    };
    if let Some(t) = args.next() {
        config.set("trials", &t)?;
    }
    config.set("policy", &args.next().unwrap_or_else(|| "nearest:50:25".into()))?;

    let rows = sweep_pool_size(&config, &[2, 5, 10, 15, 20, 25, 29])?;
    println!("{} under Different knowledge, R = {}", config.policy.strategy, config.replications);
    println!("{:>5} {:>9} {:>7}", "|S'|", "accuracy", "chance");
    for r in rows {
        println!("{:>5} {:>9.3} {:>7.3}", r.set_size, r.accuracy, 1.0 / r.set_size as f64);
    }
    Ok(())
}
