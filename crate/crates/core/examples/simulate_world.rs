//! Generates a synthetic world and looks at its geometry: how far apart
//! speakers are, how noisy utterances are, and what the pool contains.
//!
//! ```bash
//! cargo run --release -p xvlab --example simulate_world -- [seed]
//! ```

use xvlab::harness::PoolSummary;
use xvlab::{cosine_distance, generate_world, l2_distance, speaker_xvector_estimate, Result, SimParams};

fn main() -> Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let params = SimParams { seed, ..SimParams::default() };
    let world = generate_world(&params)?;

    let summary = PoolSummary::of(&world.pool);
    println!(
        "pool: {} entries from {} speakers ({} male, {} female), k = {}",
        summary.entries, summary.speakers, summary.male, summary.female, summary.dim
    );
    println!("candidates: {}", world.candidates.len());

    let c0 = &world.candidates[0];
    let c1 = &world.candidates[1];
    println!("cosine distance between two centroids = {:.4}", cosine_distance(&c0.centroid, &c1.centroid)?);

    let utt = &world.enrollment[0][0];
    let estimate = speaker_xvector_estimate(&world.enrollment[0])?;
    println!(
        "utterance to centroid: l2 {:.4} (expected about {:.4})",
        l2_distance(utt, &c0.centroid)?,
        params.sigma_utt * (params.dim as f64).sqrt()
    );
    println!(
        "{}-utterance mean to centroid: l2 {:.4}",
        params.utterances_per_speaker,
        l2_distance(&estimate, &c0.centroid)?
    );
    Ok(())
}
