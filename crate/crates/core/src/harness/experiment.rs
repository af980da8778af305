//! Experiment loops: closed world, open world and candidate-set sweeps.
//!
//! Trial `i` draws everything from `SeedStream::root(seed).derive("trial/i")`,
//! so trials can run on any number of workers and still produce identical
//! records. Open-world calibration trials take the ids right after the
//! evaluation trials and never overlap them.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::anonymizer::{anonymize_speaker, GenderPools};
use crate::attack::{
    calibrate_threshold, deanonymize, naive_deanonymize, open_world_decide, CandidateAudio, KnowledgeLevel,
};
use crate::embedding::{mean_vector, XVector};
use crate::error::{Error, Result};
use crate::metrics::{self, EerEstimate, RocCurve, Summary, TrialRecord};
use crate::rng::SeedStream;
use crate::world::{generate_world, sample_utterances, speaker_xvector_estimate, Extractor, SimulatedExtractor, SpeakerWorld};

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Attack accuracy over trials where the target was present.
    pub accuracy: Option<f64>,
    pub naive_accuracy: Option<f64>,
    /// Open-world presence detection, from the trials' minimum distances.
    pub auc: Option<f64>,
    pub eer: Option<EerEstimate>,
    pub roc: Option<RocCurve>,
    pub threshold: Option<f64>,
    pub true_distance: Option<Summary>,
    pub false_distance: Option<Summary>,
    pub utility: Option<Summary>,
    pub records: Vec<TrialRecord>,
    pub calibration: Vec<TrialRecord>,
    pub duration: Duration,
}

/// Everything a trial reads from a world, built once per world.
struct Scene<'w> {
    world: &'w SpeakerWorld,
    pools: GenderPools,
    extractor: SimulatedExtractor<'w>,
    enrollment_means: Vec<XVector>,
}

impl<'w> Scene<'w> {
    fn new(world: &'w SpeakerWorld) -> Result<Self> {
        Ok(Scene {
            world,
            pools: GenderPools::new(&world.pool),
            extractor: SimulatedExtractor::for_world(world),
            enrollment_means: world
                .enrollment
                .iter()
                .map(|u| speaker_xvector_estimate(u))
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TrialKind {
    /// Target always in S'.
    Closed,
    /// Target in S' with the configured presence probability.
    Open,
}

fn trial_stream(config: &ExperimentConfig, trial_id: usize) -> SeedStream {
    SeedStream::root(config.seed).derive(&format!("trial/{trial_id}"))
}

fn run_trial(scene: &Scene<'_>, config: &ExperimentConfig, trial_id: usize, kind: TrialKind) -> Result<TrialRecord> {
    let world = scene.world;
    let stream = trial_stream(config, trial_id);
    let n = world.candidates.len();
    let set_size = config.set_size();

    let mut setup = stream.derive("setup").rng();
    let target = setup.random_range(0..n);
    let present = match kind {
        TrialKind::Closed => true,
        TrialKind::Open => setup.random_bool(config.presence_probability),
    };
    let mut others: Vec<usize> = (0..n).filter(|&i| i != target).collect();
    let take = if present { set_size - 1 } else { set_size };
    let (chosen, _) = others.partial_shuffle(&mut setup, take);
    let mut members = chosen.to_vec();
    if present {
        members.push(target);
    }
    members.sort_unstable();

    // defender
    let speaker = &world.candidates[target];
    let mut drng = stream.derive("defender").rng();
    let utterances = match config.knowledge {
        KnowledgeLevel::Same => world.enrollment[target].clone(),
        KnowledgeLevel::Different => sample_utterances(
            speaker,
            world.params.utterances_per_speaker,
            world.params.sigma_utt,
            &mut drng,
        )?,
    };
    let pool = scene.pools.for_speaker(&speaker.speaker_id, speaker.gender, &config.policy);
    let pseudos = anonymize_speaker(&utterances, &pool, &config.policy, &mut drng)?;
    let extracted = pseudos
        .iter()
        .map(|p| scene.extractor.extract(&speaker.speaker_id, &p.vector, &mut drng as &mut dyn RngCore))
        .collect::<Result<Vec<_>>>()?;
    let observed = speaker_xvector_estimate(&extracted)?;
    let speaker_x = mean_vector(&utterances)?;
    let utility = pseudos
        .iter()
        .map(|p| metrics::utility_proxy(&speaker_x, p))
        .sum::<Result<f64>>()?
        / pseudos.len() as f64;

    // attacker
    let candidates: Vec<CandidateAudio> = members
        .iter()
        .map(|&i| CandidateAudio {
            id: world.candidates[i].speaker_id.clone(),
            gender: world.candidates[i].gender,
            utterances: world.enrollment[i].clone(),
        })
        .collect();
    let outcome = deanonymize(
        &observed,
        &candidates,
        &scene.pools,
        &config.policy,
        config.replications,
        &scene.extractor,
        &stream.derive("attacker"),
    )?;
    let naive_set: Vec<(String, XVector)> = members
        .iter()
        .map(|&i| (world.candidates[i].speaker_id.clone(), scene.enrollment_means[i].clone()))
        .collect();
    let naive = naive_deanonymize(&observed, &naive_set)?;

    Ok(TrialRecord {
        trial_id,
        truth: present.then(|| speaker.speaker_id.clone()),
        outcome,
        decision: None,
        naive_prediction: Some(naive.predicted_id),
        utility: Some(utility),
    })
}

fn run_trials(
    shared: Option<&SpeakerWorld>,
    config: &ExperimentConfig,
    ids: std::ops::Range<usize>,
    kind: TrialKind,
) -> Result<Vec<TrialRecord>> {
    let shared_scene = shared.map(Scene::new).transpose()?;
    ids.into_par_iter()
        .map(|id| match &shared_scene {
            Some(scene) => run_trial(scene, config, id, kind),
            None => {
                let mut params = config.world_params();
                params.seed = trial_stream(config, id).derive("world").rng().next_u64();
                let world = generate_world(&params)?;
                run_trial(&Scene::new(&world)?, config, id, kind)
            }
        })
        .collect()
}

/// Runs every trial of `config` and aggregates the metrics.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    config.validate()?;
    let world = if config.per_trial_world {
        None
    } else {
        Some(generate_world(&config.world_params())?)
    };
    let world = world.as_ref();

    let mut report = ExperimentReport {
        config: config.clone(),
        accuracy: None,
        naive_accuracy: None,
        auc: None,
        eer: None,
        roc: None,
        threshold: None,
        true_distance: None,
        false_distance: None,
        utility: None,
        records: Vec::new(),
        calibration: Vec::new(),
        duration: Duration::ZERO,
    };

    if config.open_world {
        let cal_ids = config.trials..config.trials + config.calibration_trials;
        report.calibration = run_trials(world, config, cal_ids, TrialKind::Closed)?;
        let cal_distances: Vec<f64> = report.calibration.iter().map(|r| r.outcome.min_distance).collect();
        let threshold = calibrate_threshold(&cal_distances, config.threshold_percentile)?;
        report.threshold = Some(threshold);

        let mut records = run_trials(world, config, 0..config.trials, TrialKind::Open)?;
        for r in &mut records {
            r.decision = Some(open_world_decide(&r.outcome, threshold));
        }
        let (present, absent): (Vec<f64>, Vec<f64>) = {
            let p = records.iter().filter(|r| r.present_truth()).map(|r| r.outcome.min_distance);
            let a = records.iter().filter(|r| !r.present_truth()).map(|r| r.outcome.min_distance);
            (p.collect(), a.collect())
        };
        if !present.is_empty() && !absent.is_empty() {
            let roc = metrics::roc_curve(&present, &absent)?;
            report.auc = Some(metrics::auc(&roc));
            report.eer = Some(metrics::eer(&present, &absent)?);
            report.roc = Some(roc);
        }
        report.records = records;
    } else {
        report.records = run_trials(world, config, 0..config.trials, TrialKind::Closed)?;
    }

    let present: Vec<TrialRecord> = report.records.iter().filter(|r| r.present_truth()).cloned().collect();
    if !present.is_empty() {
        report.accuracy = Some(metrics::accuracy(&present)?);
        report.naive_accuracy = metrics::naive_accuracy(&present)?;
    }
    let mut true_d = Vec::new();
    let mut false_d = Vec::new();
    for r in &report.records {
        for c in &r.outcome.ranked {
            if r.truth.as_deref() == Some(c.id.as_str()) {
                true_d.push(c.distance);
            } else {
                false_d.push(c.distance);
            }
        }
    }
    report.true_distance = Summary::of(&true_d);
    report.false_distance = Summary::of(&false_d);
    let utility: Vec<f64> = report.records.iter().filter_map(|r| r.utility).collect();
    report.utility = Summary::of(&utility);
    report.duration = started.elapsed();
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub set_size: usize,
    pub accuracy: f64,
    pub trials: usize,
}

/// Closed-world accuracy for each candidate-set size, all on the same world.
pub fn sweep_pool_size(config: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(Error::Empty("sweep sizes"));
    }
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0 || s > config.sim.n_candidates) {
        return Err(Error::InvalidParameter(format!(
            "set size {bad} outside 1..={} available candidates",
            config.sim.n_candidates
        )));
    }
    sizes
        .iter()
        .map(|&size| {
            let mut c = config.clone();
            c.open_world = false;
            c.candidates_per_trial = Some(size);
            let report = run_experiment(&c)?;
            Ok(SweepRow {
                set_size: size,
                accuracy: report.accuracy.expect("closed-world run has accuracy"),
                trials: report.records.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anonymizer::AnonymizationPolicy;
    use crate::world::SimParams;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            sim: SimParams {
                dim: 32,
                n_pool_speakers: 80,
                n_candidates: 8,
                utterances_per_speaker: 4,
                ..SimParams::default()
            },
            policy: AnonymizationPolicy::nearest(20, 10),
            trials: 24,
            calibration_trials: 20,
            seed: 5,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn closed_world_report_is_consistent() {
        let r = run_experiment(&small()).unwrap();
        assert_eq!(r.records.len(), 24);
        assert!(r.records.iter().enumerate().all(|(i, t)| t.trial_id == i));
        assert!(r.records.iter().all(|t| t.present_truth() && t.outcome.ranked.len() == 8));
        assert_eq!(r.accuracy, Some(metrics::accuracy(&r.records).unwrap()));
        assert!(r.auc.is_none() && r.roc.is_none());
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = run_experiment(&small()).unwrap();
        let b = run_experiment(&small()).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = single.install(|| run_experiment(&small()).unwrap());
        let b = run_experiment(&small()).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn open_world_separates_calibration() {
        let mut c = small();
        c.open_world = true;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.calibration.len(), 20);
        let eval: Vec<usize> = r.records.iter().map(|t| t.trial_id).collect();
        assert!(r.calibration.iter().all(|t| !eval.contains(&t.trial_id) && t.present_truth()));
        assert!(r.records.iter().all(|t| t.outcome.ranked.len() == 7));
        let threshold = r.threshold.unwrap();
        for t in &r.records {
            let d = t.decision.as_ref().unwrap();
            assert_eq!(d.present, t.outcome.min_distance <= threshold);
        }
        assert!(r.records.iter().any(|t| t.present_truth()));
        assert!(r.records.iter().any(|t| !t.present_truth()));
        assert!(r.auc.is_some());
    }

    #[test]
    fn per_trial_worlds_run() {
        let mut c = small();
        c.per_trial_world = true;
        c.trials = 4;
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.records.len(), 4);
        let shared = run_experiment(&ExperimentConfig { trials: 4, ..small() }).unwrap();
        assert_ne!(r.records, shared.records);
    }

    #[test]
    fn sweep_single_candidate_is_perfect() {
        let rows = sweep_pool_size(&small(), &[1]).unwrap();
        assert_eq!(rows[0].accuracy, 1.0);
        assert!(sweep_pool_size(&small(), &[9]).is_err());
        assert!(sweep_pool_size(&small(), &[0]).is_err());
    }

    #[test]
    fn sweep_full_size_equals_direct_run() {
        let c = small();
        let rows = sweep_pool_size(&c, &[8]).unwrap();
        assert_eq!(Some(rows[0].accuracy), run_experiment(&c).unwrap().accuracy);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = small();
        c.policy = AnonymizationPolicy::nearest(200, 10);
        assert!(matches!(run_experiment(&c), Err(Error::PoolTooSmall { .. })));
    }
}
