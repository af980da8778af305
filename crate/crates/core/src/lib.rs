//! An embedding-space lab for pseudo x-vector speaker anonymization and the
//! simulation-based inference attack against it.
//!
//! The pieces, bottom-up:
//!
//! - [`embedding`]: x-vectors, cosine and l2 distance, the labeled pool.
//! - [`anonymizer`]: pseudo x-vector construction (ranked nearest/farthest
//!   worlds, random average, random single) at speaker or utterance level.
//! - [`world`]: synthetic speakers, utterances, and extraction of x-vectors
//!   from anonymized speech with noise and speaker leakage.
//! - [`attack`]: the closed-world attack, a naive baseline, and open-world
//!   thresholding.
//! - [`metrics`]: accuracy, ROC/AUC, EER, utility proxy.
//! - [`harness`]: configs, experiment loops, pool files and CSV reports.
//!
//! All randomness flows through [`rng::SeedStream`]; a config and seed fully
//! determine every output.

pub mod anonymizer;
pub mod attack;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod world;

pub use anonymizer::{
    anonymize_speaker, build_pseudo_xvector, rank_pool, AnonymizationPolicy, ApplicationLevel, GenderMode,
    GenderPools, PreparedSpeaker, PseudoXVector, RankOrder, SelectionStrategy,
};
pub use attack::{
    calibrate_threshold, deanonymize, naive_deanonymize, open_world_decide, AttackOutcome, CandidateAudio,
    KnowledgeLevel, OpenWorldDecision,
};
pub use embedding::{cosine_distance, filter_by_gender, l2_distance, mean_vector, Gender, PoolEntry, XVector, XVectorPool};
pub use error::{Error, Result};
pub use harness::{run_experiment, sweep_pool_size, ExperimentConfig, ExperimentReport};
pub use metrics::{accuracy, auc, eer, roc_curve, utility_proxy, RocCurve, TrialRecord};
pub use rng::SeedStream;
pub use world::{
    generate_world, sample_utterances, simulate_extraction, speaker_xvector_estimate, Extractor, SimParams,
    PoolGranularity, SimSpeaker, SimulatedExtractor, SpeakerWorld,
};
