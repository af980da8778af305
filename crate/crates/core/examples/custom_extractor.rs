//! Plugging a different extractor model into the attack. This one leaks
//! the speaker through a fixed random projection instead of the centroid
//! direction, and the attack works unchanged.
//!
//! ```bash
//! cargo run --release -p xvlab --example custom_extractor
//! ```

use std::collections::HashMap;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use xvlab::{
    anonymize_speaker, deanonymize, generate_world, speaker_xvector_estimate, AnonymizationPolicy, CandidateAudio,
    Error, Extractor, GenderPools, Result, SeedStream, SimParams, XVector,
};

/// Extraction noise plus a per-speaker random leak vector of norm `lambda`.
struct ProjectedLeak {
    leaks: HashMap<String, Vec<f64>>,
    sigma: f64,
}

impl Extractor for ProjectedLeak {
    fn extract(&self, speaker_id: &str, pseudo: &XVector, rng: &mut dyn RngCore) -> Result<XVector> {
        let leak = self
            .leaks
            .get(speaker_id)
            .ok_or_else(|| Error::UnknownSpeaker(speaker_id.to_string()))?;
        XVector::new(
            pseudo
                .as_slice()
                .iter()
                .zip(leak)
                .map(|(p, l)| p + l + self.sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        )
    }
}

fn main() -> Result<()> {
    let params = SimParams::default();
    let world = generate_world(&params)?;
    let pools = GenderPools::new(&world.pool);
    let policy = AnonymizationPolicy::random_average(100);
    let seed = SeedStream::root(5);

    let mut rng = seed.derive("leaks").rng();
    let leaks = world
        .candidates
        .iter()
        .map(|s| {
            let v = XVector::new((0..params.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())?;
            Ok((s.speaker_id.clone(), v.normalized()?.scaled(params.lambda_leak).into_inner()))
        })
        .collect::<Result<_>>()?;
    let extractor = ProjectedLeak {
        leaks,
        sigma: params.sigma_ext,
    };

    let candidates: Vec<CandidateAudio> = world
        .candidates
        .iter()
        .zip(&world.enrollment)
        .map(|(s, u)| CandidateAudio {
            id: s.speaker_id.clone(),
            gender: s.gender,
            utterances: u.clone(),
        })
        .collect();

    let trials = 60;
    let mut correct = 0;
    for t in 0..trials {
        let target = &candidates[t % candidates.len()];
        let trial = seed.derive(&format!("trial/{t}"));
        let mut drng = trial.derive("defender").rng();
        let pool = pools.for_speaker(&target.id, target.gender, &policy);
        let extracted = anonymize_speaker(&target.utterances, &pool, &policy, &mut drng)?
            .iter()
            .map(|p| extractor.extract(&target.id, &p.vector, &mut drng))
            .collect::<Result<Vec<_>>>()?;
        let observed = speaker_xvector_estimate(&extracted)?;
        let outcome = deanonymize(&observed, &candidates, &pools, &policy, 8, &extractor, &trial.derive("attacker"))?;
        correct += usize::from(outcome.predicted_id == target.id);
    }
    println!(
        "{} with a projected leak: {correct}/{trials} correct (chance {:.1})",
        policy.strategy,
        trials as f64 / candidates.len() as f64
    );
    Ok(())
}
