//! Synthetic speaker populations.
//!
//! Stands in for a real extractor and synthesizer. Speakers are unit-norm
//! centroids drawn uniformly on the sphere; an utterance x-vector is the
//! centroid plus isotropic Gaussian noise. The x-vector an attacker extracts
//! from anonymized speech is the pseudo x-vector plus extraction noise plus
//! `λ · leak_direction`, the part of the speaker's identity that survives
//! synthesis through pitch and content features.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::embedding::{mean_vector, Gender, PoolEntry, XVector, XVectorPool};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub dim: usize,
    pub n_pool_speakers: usize,
    pub n_candidates: usize,
    pub utterances_per_speaker: usize,
    /// Per-coordinate std-dev of utterance x-vectors around the centroid.
    pub sigma_utt: f64,
    /// Per-coordinate std-dev of the extraction error on anonymized speech.
    pub sigma_ext: f64,
    /// Leakage strength λ.
    pub lambda_leak: f64,
    pub pool_granularity: PoolGranularity,
    pub seed: u64,
}

/// How pool speakers' utterances become pool entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PoolGranularity {
    /// One entry per utterance.
    #[default]
    Utterance,
    /// One entry per speaker: the mean of its utterances.
    Speaker,
}

impl PoolGranularity {
    pub fn entries_per_speaker(self, utterances_per_speaker: usize) -> usize {
        match self {
            PoolGranularity::Utterance => utterances_per_speaker,
            PoolGranularity::Speaker => 1,
        }
    }
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dim: 512,
            n_pool_speakers: 500,
            n_candidates: 29,
            utterances_per_speaker: 4,
            sigma_utt: 0.12,
            sigma_ext: 0.01,
            lambda_leak: 0.05,
            pool_granularity: PoolGranularity::Utterance,
            seed: 0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.dim < 2 {
            return bad("dim must be at least 2");
        }
        if self.n_pool_speakers == 0 || self.n_candidates == 0 || self.utterances_per_speaker == 0 {
            return bad("speaker and utterance counts must be at least 1");
        }
        for (name, v) in [
            ("sigma_utt", self.sigma_utt),
            ("sigma_ext", self.sigma_ext),
            ("lambda_leak", self.lambda_leak),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSpeaker {
    pub speaker_id: String,
    pub gender: Gender,
    pub centroid: XVector,
    pub leak_direction: XVector,
}

impl SimSpeaker {
    pub fn new(speaker_id: impl Into<String>, gender: Gender, centroid: XVector) -> Result<Self> {
        let centroid = centroid.normalized()?;
        let leak_direction = leak_direction_for(&centroid)?;
        Ok(SimSpeaker {
            speaker_id: speaker_id.into(),
            gender,
            centroid,
            leak_direction,
        })
    }
}

/// The speaker-identifying direction that leaks through synthesis: the
/// normalized centroid.
pub fn leak_direction_for(centroid: &XVector) -> Result<XVector> {
    centroid.normalized()
}

#[derive(Clone, Debug)]
pub struct SpeakerWorld {
    pub pool: XVectorPool,
    /// The candidate set S'.
    pub candidates: Vec<SimSpeaker>,
    /// Utterance x-vectors the attacker holds for each candidate, parallel
    /// to `candidates`.
    pub enrollment: Vec<Vec<XVector>>,
    pub params: SimParams,
}

impl SpeakerWorld {
    pub fn candidate(&self, id: &str) -> Option<&SimSpeaker> {
        self.candidates.iter().find(|s| s.speaker_id == id)
    }
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, sigma: f64, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn unit_sphere_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<XVector> {
    loop {
        let v = XVector::new(gaussian_vector(dim, 1.0, rng))?;
        if v.norm() > 0.0 {
            return v.normalized();
        }
    }
}

fn alternating_gender(i: usize) -> Gender {
    if i % 2 == 0 {
        Gender::Male
    } else {
        Gender::Female
    }
}

/// Builds a world from `params`; identical params give a bit-identical world.
///
/// Pool speakers are `pool-NNNN`, candidates `cand-NN`. Each pool speaker
/// contributes `utterances_per_speaker` noisy utterances, as separate pool
/// entries or averaged into one, per [`PoolGranularity`].
pub fn generate_world(params: &SimParams) -> Result<SpeakerWorld> {
    params.validate()?;
    let root = SeedStream::root(params.seed).derive("world");

    let mut rng = root.derive("pool").rng();
    let mut entries = Vec::with_capacity(params.n_pool_speakers);
    for i in 0..params.n_pool_speakers {
        let speaker = SimSpeaker::new(format!("pool-{i:04}"), alternating_gender(i), unit_sphere_point(params.dim, &mut rng)?)?;
        let utts = sample_utterances(&speaker, params.utterances_per_speaker, params.sigma_utt, &mut rng)?;
        match params.pool_granularity {
            PoolGranularity::Speaker => {
                let avg = speaker_xvector_estimate(&utts)?;
                entries.push(PoolEntry::new(speaker.speaker_id, "mean", speaker.gender, avg)?);
            }
            PoolGranularity::Utterance => {
                for (j, u) in utts.into_iter().enumerate() {
                    entries.push(PoolEntry::new(speaker.speaker_id.clone(), format!("utt-{j:02}"), speaker.gender, u)?);
                }
            }
        }
    }
    let pool = XVectorPool::new(params.dim, entries)?;

    let mut rng = root.derive("candidates").rng();
    let mut candidates = Vec::with_capacity(params.n_candidates);
    let mut enrollment = Vec::with_capacity(params.n_candidates);
    for i in 0..params.n_candidates {
        let speaker = SimSpeaker::new(format!("cand-{i:02}"), alternating_gender(i), unit_sphere_point(params.dim, &mut rng)?)?;
        enrollment.push(sample_utterances(&speaker, params.utterances_per_speaker, params.sigma_utt, &mut rng)?);
        candidates.push(speaker);
    }

    Ok(SpeakerWorld {
        pool,
        candidates,
        enrollment,
        params: params.clone(),
    })
}

/// `n` utterance x-vectors: centroid plus N(0, σ²I) noise each.
pub fn sample_utterances<R: Rng + ?Sized>(
    speaker: &SimSpeaker,
    n: usize,
    sigma_utt: f64,
    rng: &mut R,
) -> Result<Vec<XVector>> {
    if n == 0 {
        return Err(Error::InvalidParameter("utterance count must be at least 1".into()));
    }
    let c = speaker.centroid.as_slice();
    (0..n)
        .map(|_| {
            let noise = gaussian_vector(c.len(), sigma_utt, rng);
            XVector::new(c.iter().zip(noise).map(|(a, e)| a + e).collect())
        })
        .collect()
}

/// Speaker-level x-vector: the mean of its utterance x-vectors.
pub fn speaker_xvector_estimate(utterances: &[XVector]) -> Result<XVector> {
    mean_vector(utterances)
}

/// The x-vector extracted from speech of `speaker` synthesized with
/// `pseudo`: `pseudo + N(0, σ²I) + λ · leak_direction`.
pub fn simulate_extraction<R: Rng + ?Sized>(
    pseudo: &XVector,
    speaker: &SimSpeaker,
    sigma_ext: f64,
    lambda_leak: f64,
    rng: &mut R,
) -> Result<XVector> {
    let leak = speaker.leak_direction.as_slice();
    if leak.len() != pseudo.dim() {
        return Err(Error::DimensionMismatch {
            expected: pseudo.dim(),
            found: leak.len(),
        });
    }
    let noise = gaussian_vector(pseudo.dim(), sigma_ext, rng);
    XVector::new(
        pseudo
            .as_slice()
            .iter()
            .zip(noise)
            .zip(leak)
            .map(|((p, e), l)| p + e + lambda_leak * l)
            .collect(),
    )
}

/// Turns a pseudo x-vector into the x-vector observed after synthesis and
/// re-extraction for a given speaker's audio.
pub trait Extractor: Sync {
    fn extract(&self, speaker_id: &str, pseudo: &XVector, rng: &mut dyn rand::RngCore) -> Result<XVector>;
}

/// [`simulate_extraction`] over a fixed set of known speakers.
#[derive(Clone, Debug)]
pub struct SimulatedExtractor<'a> {
    speakers: HashMap<&'a str, &'a SimSpeaker>,
    pub sigma_ext: f64,
    pub lambda_leak: f64,
}

impl<'a> SimulatedExtractor<'a> {
    pub fn new(speakers: impl IntoIterator<Item = &'a SimSpeaker>, sigma_ext: f64, lambda_leak: f64) -> Self {
        SimulatedExtractor {
            speakers: speakers.into_iter().map(|s| (s.speaker_id.as_str(), s)).collect(),
            sigma_ext,
            lambda_leak,
        }
    }

    /// Extractor for the candidates of `world` with the world's noise and leakage.
    pub fn for_world(world: &'a SpeakerWorld) -> Self {
        Self::new(&world.candidates, world.params.sigma_ext, world.params.lambda_leak)
    }
}

impl Extractor for SimulatedExtractor<'_> {
    fn extract(&self, speaker_id: &str, pseudo: &XVector, rng: &mut dyn rand::RngCore) -> Result<XVector> {
        let speaker = self
            .speakers
            .get(speaker_id)
            .ok_or_else(|| Error::UnknownSpeaker(speaker_id.to_string()))?;
        simulate_extraction(pseudo, speaker, self.sigma_ext, self.lambda_leak, rng)
    }
}
