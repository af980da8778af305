//! One closed-world trial by hand: the defender anonymizes a target's
//! utterances, the attacker extracts x-vectors from the result and runs the
//! simulation attack and the naive baseline over every candidate.
//!
//! ```bash
//! cargo run --release -p xvlab --example closed_world_attack -- [target]
//! ```

use xvlab::attack::simulate_candidate;
use xvlab::{
    anonymize_speaker, deanonymize, generate_world, naive_deanonymize, speaker_xvector_estimate, AnonymizationPolicy,
    CandidateAudio, Extractor, GenderPools, Result, SeedStream, SimParams, SimulatedExtractor,
};

fn main() -> Result<()> {
    let target: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let world = generate_world(&SimParams::default())?;
    let pools = GenderPools::new(&world.pool);
    let extractor = SimulatedExtractor::for_world(&world);
    let policy = AnonymizationPolicy::farthest(200, 100);
    let seed = SeedStream::root(11);

    // defender
    let speaker = &world.candidates[target];
    let pool = pools.for_speaker(&speaker.speaker_id, speaker.gender, &policy);
    let mut rng = seed.derive("defender").rng();
    let pseudos = anonymize_speaker(&world.enrollment[target], &pool, &policy, &mut rng)?;
    let extracted = pseudos
        .iter()
        .map(|p| extractor.extract(&speaker.speaker_id, &p.vector, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let observed = speaker_xvector_estimate(&extracted)?;

    // attacker, holding the same utterances the defender used
    let candidates: Vec<CandidateAudio> = world
        .candidates
        .iter()
        .zip(&world.enrollment)
        .map(|(s, utts)| CandidateAudio {
            id: s.speaker_id.clone(),
            gender: s.gender,
            utterances: utts.clone(),
        })
        .collect();
    let outcome = deanonymize(&observed, &candidates, &pools, &policy, 1, &extractor, &seed.derive("attacker"))?;
    println!("target {}, attack predicts {}", speaker.speaker_id, outcome.predicted_id);
    for r in outcome.ranked.iter().take(5) {
        println!("  {:<8} {:.4}", r.id, r.distance);
    }

    let originals = candidates
        .iter()
        .map(|c| Ok((c.id.clone(), speaker_xvector_estimate(&c.utterances)?)))
        .collect::<Result<Vec<_>>>()?;
    let naive = naive_deanonymize(&observed, &originals)?;
    println!("naive baseline predicts {}", naive.predicted_id);

    // averaging more simulated runs pulls x'_i toward its expectation
    for r in [1, 4, 16] {
        let sim = simulate_candidate(&candidates[target], &pools, &policy, r, &extractor, &seed.derive("replications"))?;
        println!("R = {r:>2}: distance to observed {:.4}", xvlab::l2_distance(&sim, &observed)?);
    }
    Ok(())
}
