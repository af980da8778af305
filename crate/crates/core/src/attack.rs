//! The de-anonymization attack.
//!
//! For every candidate speaker the attacker re-runs the anonymization
//! pipeline on audio it holds for that speaker, extracts an x-vector from
//! the result, and ranks candidates by l2 distance to the x-vector extracted
//! from the target's anonymized speech. The open-world variant thresholds the
//! smallest distance to decide whether the target is among the candidates.

use std::fmt;
use std::str::FromStr;

use crate::anonymizer::{AnonymizationPolicy, GenderPools, PreparedSpeaker};
use crate::embedding::{l2_distance, mean_vector, Gender, XVector};
use crate::error::{Error, Result};
use crate::metrics::nearest_rank_percentile;
use crate::rng::SeedStream;
use crate::world::{speaker_xvector_estimate, Extractor};

/// What audio the attacker holds for the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KnowledgeLevel {
    /// The exact utterances the target anonymized.
    Same,
    /// Other utterances of the same speaker.
    Different,
}

impl fmt::Display for KnowledgeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KnowledgeLevel::Same => "same",
            KnowledgeLevel::Different => "different",
        })
    }
}

impl FromStr for KnowledgeLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "same" => Ok(KnowledgeLevel::Same),
            "different" => Ok(KnowledgeLevel::Different),
            other => Err(Error::InvalidParameter(format!("unknown knowledge level `{other}`"))),
        }
    }
}

/// A candidate speaker and the utterance x-vectors the attacker holds.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateAudio {
    pub id: String,
    pub gender: Gender,
    pub utterances: Vec<XVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedCandidate {
    pub id: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackOutcome {
    /// Ascending by distance; ties keep candidate order.
    pub ranked: Vec<RankedCandidate>,
    pub predicted_id: String,
    pub min_distance: f64,
}

impl AttackOutcome {
    /// Ranks `(id, distance)` pairs given in candidate order.
    pub fn from_distances(distances: Vec<(String, f64)>) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::Empty("candidate set"));
        }
        if distances.iter().any(|(_, d)| !d.is_finite()) {
            return Err(Error::NonFinite("candidate distance"));
        }
        let mut ranked: Vec<RankedCandidate> = distances
            .into_iter()
            .map(|(id, distance)| RankedCandidate { id, distance })
            .collect();
        ranked.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        let best = &ranked[0];
        Ok(AttackOutcome {
            predicted_id: best.id.clone(),
            min_distance: best.distance,
            ranked,
        })
    }

    pub fn distance_of(&self, id: &str) -> Option<f64> {
        self.ranked.iter().find(|r| r.id == id).map(|r| r.distance)
    }
}

/// Runs the attack against `observed`, the speaker-level x-vector extracted
/// from the target's anonymized speech.
///
/// Each candidate's simulation draws from `seed.derive(candidate_id)`, so the
/// outcome does not depend on candidate evaluation order. With
/// `replications > 1` the extracted speaker x-vectors of that many
/// independent simulations are averaged before measuring distance.
pub fn deanonymize(
    observed: &XVector,
    candidates: &[CandidateAudio],
    pools: &GenderPools,
    policy: &AnonymizationPolicy,
    replications: usize,
    extractor: &dyn Extractor,
    seed: &SeedStream,
) -> Result<AttackOutcome> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate set"));
    }
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    let distances = candidates
        .iter()
        .map(|c| {
            let simulated = simulate_candidate(c, pools, policy, replications, extractor, &seed.derive(&c.id))?;
            Ok((c.id.clone(), l2_distance(&simulated, observed)?))
        })
        .collect::<Result<Vec<_>>>()?;
    AttackOutcome::from_distances(distances)
}

/// The attacker's x'_i for one candidate.
pub fn simulate_candidate(
    candidate: &CandidateAudio,
    pools: &GenderPools,
    policy: &AnonymizationPolicy,
    replications: usize,
    extractor: &dyn Extractor,
    seed: &SeedStream,
) -> Result<XVector> {
    let mut rng = seed.rng();
    let pool = pools.for_speaker(&candidate.id, candidate.gender, policy);
    let prepared = PreparedSpeaker::new(&candidate.utterances, &pool, policy)?;
    let runs = (0..replications)
        .map(|_| {
            let pseudos = prepared.anonymize(&mut rng)?;
            let extracted = pseudos
                .iter()
                .map(|p| extractor.extract(&candidate.id, &p.vector, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            speaker_xvector_estimate(&extracted)
        })
        .collect::<Result<Vec<_>>>()?;
    if let [single] = runs.as_slice() {
        return Ok(single.clone());
    }
    mean_vector(&runs)
}

/// Baseline that skips simulating the anonymization: ranks candidates by the
/// distance of their original speaker x-vector to `observed`.
pub fn naive_deanonymize(observed: &XVector, candidates: &[(String, XVector)]) -> Result<AttackOutcome> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate set"));
    }
    let distances = candidates
        .iter()
        .map(|(id, x)| Ok((id.clone(), l2_distance(x, observed)?)))
        .collect::<Result<Vec<_>>>()?;
    AttackOutcome::from_distances(distances)
}

/// Nearest-rank percentile of closed-world minimum distances.
pub fn calibrate_threshold(min_distances: &[f64], percentile: f64) -> Result<f64> {
    nearest_rank_percentile(min_distances, percentile)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpenWorldDecision {
    pub present: bool,
    pub predicted_id: Option<String>,
    pub min_distance: f64,
    pub threshold: f64,
}

/// Declares the target present when `min_distance ≤ threshold`.
pub fn open_world_decide(outcome: &AttackOutcome, threshold: f64) -> OpenWorldDecision {
    let present = outcome.min_distance <= threshold;
    OpenWorldDecision {
        present,
        predicted_id: present.then(|| outcome.predicted_id.clone()),
        min_distance: outcome.min_distance,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymizer::SelectionStrategy;
    use crate::embedding::{PoolEntry, XVectorPool};
    use crate::world::{generate_world, sample_utterances, simulate_extraction, SimParams, SimulatedExtractor};
    use proptest::prelude::*;

    fn xv(v: &[f64]) -> XVector {
        XVector::new(v.to_vec()).unwrap()
    }

    /// Extractor that returns the pseudo x-vector untouched.
    struct Identity;

    impl Extractor for Identity {
        fn extract(&self, _: &str, pseudo: &XVector, _: &mut dyn rand::RngCore) -> Result<XVector> {
            Ok(pseudo.clone())
        }
    }

    fn small_world(seed: u64) -> crate::world::SpeakerWorld {
        generate_world(&SimParams {
            dim: 24,
            n_pool_speakers: 60,
            n_candidates: 5,
            utterances_per_speaker: 4,
            sigma_utt: 0.05,
            sigma_ext: 0.0,
            lambda_leak: 0.0,
            pool_granularity: Default::default(),
            seed,
        })
        .unwrap()
    }

    fn audio(world: &crate::world::SpeakerWorld) -> Vec<CandidateAudio> {
        world
            .candidates
            .iter()
            .zip(&world.enrollment)
            .map(|(s, u)| CandidateAudio {
                id: s.speaker_id.clone(),
                gender: s.gender,
                utterances: u.clone(),
            })
            .collect()
    }

    #[test]
    fn single_candidate_always_predicted() {
        let w = small_world(1);
        let pools = GenderPools::new(&w.pool);
        let cands = &audio(&w)[..1];
        let far = XVector::new(vec![100.0; 24]).unwrap();
        let out = deanonymize(&far, cands, &pools, &AnonymizationPolicy::nearest(10, 5), 1, &Identity, &SeedStream::root(0)).unwrap();
        assert_eq!(out.predicted_id, "cand-00");
        assert_eq!(out.ranked.len(), 1);
    }

    #[test]
    fn exact_match_wins_with_zero_distance() {
        let pool = XVectorPool::new(
            2,
            vec![
                PoolEntry::new("p0", "u", Gender::Male, xv(&[1.0, 0.0])).unwrap(),
                PoolEntry::new("p1", "u", Gender::Male, xv(&[0.0, 1.0])).unwrap(),
                PoolEntry::new("p2", "u", Gender::Male, xv(&[-1.0, 0.2])).unwrap(),
            ],
        )
        .unwrap();
        let pools = GenderPools::new(&pool);
        let policy = AnonymizationPolicy::nearest(1, 1);
        let cands = vec![
            CandidateAudio { id: "A".into(), gender: Gender::Male, utterances: vec![xv(&[1.0, 0.1])] },
            CandidateAudio { id: "B".into(), gender: Gender::Male, utterances: vec![xv(&[-1.0, 0.1])] },
        ];
        // A's nearest pool vector is p0 itself.
        let out = deanonymize(&xv(&[1.0, 0.0]), &cands, &pools, &policy, 1, &Identity, &SeedStream::root(0)).unwrap();
        assert_eq!(out.predicted_id, "A");
        assert_eq!(out.min_distance, 0.0);
    }

    #[test]
    fn deterministic_pipeline_matches_exhaustive_oracle() {
        let w = small_world(2);
        let pools = GenderPools::new(&w.pool);
        let cands = audio(&w);
        let policy = AnonymizationPolicy::nearest(10, 10);
        let ex = SimulatedExtractor::for_world(&w);
        let observed = sample_utterances(&w.candidates[3], 1, 0.2, &mut SeedStream::root(9).rng()).unwrap().remove(0);

        // oracle: the mean of each candidate's 10 nearest same-gender pool vectors
        let mut best = (String::new(), f64::INFINITY);
        for c in &cands {
            let x = mean_vector(&c.utterances).unwrap();
            let mut d: Vec<(f64, usize)> = w
                .pool
                .iter()
                .filter(|(_, e)| e.gender == c.gender)
                .map(|(i, e)| (crate::embedding::cosine_distance(&x, &e.vector).unwrap(), i))
                .collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let pseudo = mean_vector(d[..10].iter().map(|(_, i)| &w.pool.entries()[*i].vector)).unwrap();
            let dist = l2_distance(&pseudo, &observed).unwrap();
            if dist < best.1 {
                best = (c.id.clone(), dist);
            }
        }
        let out = deanonymize(&observed, &cands, &pools, &policy, 1, &ex, &SeedStream::root(4)).unwrap();
        assert_eq!(out.predicted_id, best.0);
        assert!((out.min_distance - best.1).abs() < 1e-12);
    }

    #[test]
    fn deanonymize_is_seed_deterministic() {
        let w = generate_world(&SimParams { dim: 24, n_pool_speakers: 60, n_candidates: 5, sigma_ext: 0.1, lambda_leak: 0.1, seed: 3, ..SimParams::default() }).unwrap();
        let pools = GenderPools::new(&w.pool);
        let cands = audio(&w);
        let ex = SimulatedExtractor::for_world(&w);
        let policy = AnonymizationPolicy::farthest(20, 10);
        let obs = w.enrollment[0][0].clone();
        let a = deanonymize(&obs, &cands, &pools, &policy, 2, &ex, &SeedStream::root(8)).unwrap();
        let b = deanonymize(&obs, &cands, &pools, &policy, 2, &ex, &SeedStream::root(8)).unwrap();
        assert_eq!(a, b);
        // candidate order does not change a candidate's distance
        let mut rev = cands.clone();
        rev.reverse();
        let c = deanonymize(&obs, &rev, &pools, &policy, 2, &ex, &SeedStream::root(8)).unwrap();
        for r in &a.ranked {
            assert_eq!(c.distance_of(&r.id), Some(r.distance));
        }
    }

    #[test]
    fn replications_shrink_distance_variance() {
        let w = generate_world(&SimParams { dim: 32, n_pool_speakers: 80, n_candidates: 2, sigma_ext: 0.05, lambda_leak: 0.0, seed: 5, ..SimParams::default() }).unwrap();
        let pools = GenderPools::new(&w.pool);
        let cands = &audio(&w)[..1];
        let ex = SimulatedExtractor::for_world(&w);
        let policy = AnonymizationPolicy::nearest(30, 15);
        let obs = mean_vector(&w.enrollment[1]).unwrap();
        let variance = |r: usize| {
            let d: Vec<f64> = (0..100)
                .map(|i| deanonymize(&obs, cands, &pools, &policy, r, &ex, &SeedStream::root(i)).unwrap().min_distance)
                .collect();
            let m = d.iter().sum::<f64>() / d.len() as f64;
            d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64
        };
        let vs: Vec<f64> = [1, 2, 4, 8, 16].iter().map(|&r| variance(r)).collect();
        assert!(vs.windows(2).all(|p| p[1] < p[0]), "{vs:?}");
    }

    #[test]
    fn attack_errors() {
        let w = small_world(6);
        let pools = GenderPools::new(&w.pool);
        let policy = AnonymizationPolicy::random_single();
        let obs = w.enrollment[0][0].clone();
        assert!(matches!(
            deanonymize(&obs, &[], &pools, &policy, 1, &Identity, &SeedStream::root(0)),
            Err(Error::Empty(_))
        ));
        let wrong = XVector::new(vec![1.0; 3]).unwrap();
        assert!(deanonymize(&wrong, &audio(&w), &pools, &policy, 1, &Identity, &SeedStream::root(0)).is_err());
        assert!(naive_deanonymize(&obs, &[]).is_err());
    }

    #[test]
    fn naive_examples() {
        let cands = vec![("a".to_string(), xv(&[1.0, 0.0])), ("b".to_string(), xv(&[0.0, 1.0]))];
        assert_eq!(naive_deanonymize(&xv(&[0.0, 1.0]), &cands).unwrap().predicted_id, "b");
        assert_eq!(naive_deanonymize(&xv(&[9.0, 9.0]), &cands[..1]).unwrap().predicted_id, "a");
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(calibrate_threshold(&[1.0, 2.0, 3.0, 4.0], 100.0).unwrap(), 4.0);
        assert_eq!(calibrate_threshold(&[4.0, 3.0, 2.0, 1.0], 50.0).unwrap(), 2.0);
        assert_eq!(calibrate_threshold(&[3.0, 1.0, 2.0], 0.0).unwrap(), 1.0);
        for q in [0.0, 12.5, 99.0, 100.0] {
            assert_eq!(calibrate_threshold(&[7.0], q).unwrap(), 7.0);
        }
        assert!(calibrate_threshold(&[], 50.0).is_err());
        assert!(calibrate_threshold(&[1.0], 101.0).is_err());
    }

    fn outcome(d: f64) -> AttackOutcome {
        AttackOutcome::from_distances(vec![("x".into(), d), ("y".into(), d + 1.0)]).unwrap()
    }

    #[test]
    fn open_world_boundary_is_inclusive() {
        let a = open_world_decide(&outcome(0.3), 0.5);
        assert!(a.present);
        assert_eq!(a.predicted_id.as_deref(), Some("x"));
        assert!(open_world_decide(&outcome(0.5), 0.5).present);
        let c = open_world_decide(&outcome(0.7), 0.5);
        assert!(!c.present);
        assert_eq!(c.predicted_id, None);
    }

    #[test]
    fn superset_never_increases_min_distance() {
        let w = generate_world(&SimParams { dim: 24, n_pool_speakers: 60, n_candidates: 6, sigma_ext: 0.05, lambda_leak: 0.05, seed: 7, ..SimParams::default() }).unwrap();
        let pools = GenderPools::new(&w.pool);
        let cands = audio(&w);
        let ex = SimulatedExtractor::for_world(&w);
        let policy = AnonymizationPolicy::nearest(20, 10);
        let pseudo = w.pool.entries()[3].vector.clone();
        let obs = simulate_extraction(&pseudo, &w.candidates[2], 0.05, 0.05, &mut SeedStream::root(1).rng()).unwrap();
        let seed = SeedStream::root(2);
        let mut prev = f64::INFINITY;
        for n in 1..=cands.len() {
            let d = deanonymize(&obs, &cands[..n], &pools, &policy, 1, &ex, &seed).unwrap().min_distance;
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn knowledge_level_parses() {
        assert_eq!("Same".parse::<KnowledgeLevel>().unwrap(), KnowledgeLevel::Same);
        assert_eq!("different".parse::<KnowledgeLevel>().unwrap(), KnowledgeLevel::Different);
        assert!("original".parse::<KnowledgeLevel>().is_err());
        assert!(matches!(
            AnonymizationPolicy::new(SelectionStrategy::RandomSingle).strategy,
            SelectionStrategy::RandomSingle
        ));
    }

    proptest! {
        #[test]
        fn ranking_matches_full_sort(ds in prop::collection::vec(prop::sample::select(vec![0.1, 0.2, 0.5, 0.9, 1.3]), 1..25)) {
            let pairs: Vec<(String, f64)> = ds.iter().enumerate().map(|(i, &d)| (format!("c{i}"), d)).collect();
            let out = AttackOutcome::from_distances(pairs.clone()).unwrap();
            let mut oracle = pairs;
            oracle.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let got: Vec<(String, f64)> = out.ranked.iter().map(|r| (r.id.clone(), r.distance)).collect();
            prop_assert_eq!(&got, &oracle);
            prop_assert_eq!(&out.predicted_id, &oracle[0].0);
            prop_assert_eq!(out.min_distance, oracle[0].1);
        }

        #[test]
        fn decision_monotone_in_threshold(d in 0.0f64..5.0, t1 in 0.0f64..5.0, dt in 0.0f64..5.0) {
            let o = outcome(d);
            if open_world_decide(&o, t1).present {
                prop_assert!(open_world_decide(&o, t1 + dt).present);
            }
        }
    }
}
