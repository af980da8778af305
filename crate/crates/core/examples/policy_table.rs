//! Attack accuracy for every pseudo x-vector construction method under Same
//! and Different knowledge, plus the leak-free ("normalized") setting.
//!
//! ```bash
//! cargo run --release -p xvlab --example policy_table -- [trials] [key=value ...]
//! ```
//!
//! Extra `key=value` arguments override config keys, e.g. `sigma_ext=0.01`.

use xvlab::{run_experiment, AnonymizationPolicy, ExperimentConfig, KnowledgeLevel, Result};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().and_then(|t| t.parse().ok()).unwrap_or(200);
    let mut base = ExperimentConfig {
        trials,
        ..ExperimentConfig::default()
    };
    for kv in args {
        if let Some((k, v)) = kv.split_once('=') {
            base.set(k, v)?;
        }
    }

    let policies = [
        ("200 Farthest", AnonymizationPolicy::farthest(200, 100)),
        ("200 Nearest", AnonymizationPolicy::nearest(200, 100)),
        ("50 Farthest", AnonymizationPolicy::farthest(50, 25)),
        ("50 Nearest", AnonymizationPolicy::nearest(50, 25)),
        ("Random Average", AnonymizationPolicy::random_average(100)),
        ("Random Single", AnonymizationPolicy::random_single()),
    ];

    println!("{:<16} {:>8} {:>10} {:>11} {:>8}", "policy", "Same", "Different", "Normalized", "Naive");
    for (name, policy) in policies {
        let run = |knowledge, lambda: Option<f64>| {
            let mut c = base.clone();
            c.policy = policy.clone();
            c.knowledge = knowledge;
            if let Some(l) = lambda {
                c.sim.lambda_leak = l;
            }
            run_experiment(&c)
        };
        let same = run(KnowledgeLevel::Same, None)?;
        let diff = run(KnowledgeLevel::Different, None)?;
        let norm = run(KnowledgeLevel::Same, Some(0.0))?;
        let pct = |v: Option<f64>| 100.0 * v.unwrap_or(f64::NAN);
        println!(
            "{:<16} {:>8.1} {:>10.1} {:>11.1} {:>8.1}",
            name,
            pct(same.accuracy),
            pct(diff.accuracy),
            pct(norm.accuracy),
            pct(diff.naive_accuracy)
        );
    }
    Ok(())
}
