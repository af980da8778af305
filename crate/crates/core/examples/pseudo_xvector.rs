//! Builds a pseudo x-vector with every selection strategy for one speaker
//! and reports which pool entries went into it and how far it moved.
//!
//! ```bash
//! cargo run --release -p xvlab --example pseudo_xvector
//! ```

use std::collections::HashSet;

use xvlab::metrics::utility_proxy;
use xvlab::{
    anonymize_speaker, build_pseudo_xvector, generate_world, speaker_xvector_estimate, AnonymizationPolicy,
    ApplicationLevel, GenderPools, Result, SeedStream, SimParams,
};

fn main() -> Result<()> {
    let world = generate_world(&SimParams::default())?;
    let pools = GenderPools::new(&world.pool);
    let speaker = &world.candidates[0];
    let x = speaker_xvector_estimate(&world.enrollment[0])?;
    let rng = SeedStream::root(7);

    println!("speaker {} ({}), pool {} entries", speaker.speaker_id, speaker.gender, world.pool.len());
    println!("{:<18} {:>9} {:>9} {:>16}", "policy", "selected", "speakers", "cosine distance");
    for policy in [
        AnonymizationPolicy::nearest(200, 100),
        AnonymizationPolicy::farthest(200, 100),
        AnonymizationPolicy::nearest(50, 25),
        AnonymizationPolicy::farthest(50, 25),
        AnonymizationPolicy::random_average(100),
        AnonymizationPolicy::random_single(),
    ] {
        let pool = pools.for_speaker(&speaker.speaker_id, speaker.gender, &policy);
        let pseudo = build_pseudo_xvector(&x, &pool, &policy, &mut rng.derive(&policy.strategy.to_string()).rng())?;
        let speakers: HashSet<&str> = pseudo
            .selected_indices
            .iter()
            .map(|&i| world.pool.entries()[i].speaker_id.as_str())
            .collect();
        println!(
            "{:<18} {:>9} {:>9} {:>16.4}",
            policy.strategy.to_string(),
            pseudo.selected_indices.len(),
            speakers.len(),
            utility_proxy(&x, &pseudo)?
        );
    }

    // speaker level shares one pseudo x-vector, utterance level draws one each
    let policy = AnonymizationPolicy::farthest(200, 100);
    let pool = pools.for_speaker(&speaker.speaker_id, speaker.gender, &policy);
    for level in [ApplicationLevel::Speaker, ApplicationLevel::Utterance] {
        let policy = policy.clone().with_level(level);
        let pseudos = anonymize_speaker(&world.enrollment[0], &pool, &policy, &mut rng.derive("levels").rng())?;
        let distinct = pseudos.windows(2).filter(|w| w[0].vector != w[1].vector).count() + 1;
        println!("{level:?} level: {} utterances, {distinct} distinct pseudo x-vectors", pseudos.len());
    }
    Ok(())
}
