//! Experiment configuration.
//!
//! The file format is flat `key = value` text, one pair per line, with `#`
//! starting a comment. Every key has a default, so an empty file is a valid
//! config. [`ExperimentConfig::to_config_text`] writes a file that parses back
//! to the same config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::anonymizer::{AnonymizationPolicy, ApplicationLevel, GenderMode, SelectionStrategy};
use crate::attack::KnowledgeLevel;
use crate::error::{Error, Result};
use crate::world::{PoolGranularity, SimParams};

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// World parameters. `sim.seed` is overwritten by [`Self::seed`].
    pub sim: SimParams,
    pub policy: AnonymizationPolicy,
    pub knowledge: KnowledgeLevel,
    pub open_world: bool,
    pub presence_probability: f64,
    pub threshold_percentile: f64,
    pub calibration_trials: usize,
    pub replications: usize,
    pub trials: usize,
    /// Size of the candidate set S' per trial; `None` means every candidate.
    pub candidates_per_trial: Option<usize>,
    /// Draw a fresh world per trial instead of one per experiment.
    pub per_trial_world: bool,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sim: SimParams::default(),
            policy: AnonymizationPolicy::farthest(200, 100),
            knowledge: KnowledgeLevel::Same,
            open_world: false,
            presence_probability: 0.5,
            threshold_percentile: 95.0,
            calibration_trials: 200,
            replications: 1,
            trials: 200,
            candidates_per_trial: None,
            per_trial_world: false,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn world_params(&self) -> SimParams {
        SimParams {
            seed: self.seed,
            ..self.sim.clone()
        }
    }

    /// Number of candidates in S' for a trial.
    pub fn set_size(&self) -> usize {
        let n = self.sim.n_candidates;
        let requested = self.candidates_per_trial.unwrap_or(n).min(n);
        if self.open_world {
            // an absent target still leaves a full-size set of others
            requested.min(n.saturating_sub(1))
        } else {
            requested
        }
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::InvalidParameter(format!("invalid value `{value}` for `{key}`"));
        let usize_ = || value.parse::<usize>().map_err(|_| bad());
        let f64_ = || value.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
        let bool_ = || parse_bool(value).ok_or_else(bad);
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "trials" => self.trials = usize_()?,
            "dim" => self.sim.dim = usize_()?,
            "pool_speakers" => self.sim.n_pool_speakers = usize_()?,
            "candidates" => self.sim.n_candidates = usize_()?,
            "utterances_per_speaker" => self.sim.utterances_per_speaker = usize_()?,
            "pool_granularity" => {
                self.sim.pool_granularity = match value {
                    "utterance" => PoolGranularity::Utterance,
                    "speaker" => PoolGranularity::Speaker,
                    _ => return Err(bad()),
                }
            }
            "sigma_utt" => self.sim.sigma_utt = f64_()?,
            "sigma_ext" => self.sim.sigma_ext = f64_()?,
            "lambda_leak" => self.sim.lambda_leak = f64_()?,
            "policy" => self.policy.strategy = value.parse::<SelectionStrategy>()?,
            "level" => {
                self.policy.level = match value {
                    "speaker" => ApplicationLevel::Speaker,
                    "utterance" => ApplicationLevel::Utterance,
                    _ => return Err(bad()),
                }
            }
            "gender_mode" => {
                self.policy.gender_mode = match value {
                    "same" => GenderMode::SameGender,
                    "opposite" => GenderMode::OppositeGender,
                    _ => return Err(bad()),
                }
            }
            "exclude_own_speaker" => self.policy.exclude_own_speaker = bool_()?,
            "knowledge" => self.knowledge = value.parse()?,
            "open_world" => self.open_world = bool_()?,
            "presence_probability" => self.presence_probability = f64_()?,
            "threshold_percentile" => self.threshold_percentile = f64_()?,
            "calibration_trials" => self.calibration_trials = usize_()?,
            "replications" => self.replications = usize_()?,
            "candidates_per_trial" => {
                self.candidates_per_trial = if value == "all" { None } else { Some(usize_()?) }
            }
            "per_trial_world" => self.per_trial_world = bool_()?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::InvalidParameter(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `key = value`"))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        self.sim.validate()?;
        self.policy.strategy.validate()?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.presence_probability) {
            return bad(format!("presence_probability {} outside [0, 1]", self.presence_probability));
        }
        if !(0.0..=100.0).contains(&self.threshold_percentile) {
            return bad(format!("threshold_percentile {} outside [0, 100]", self.threshold_percentile));
        }
        if let Some(m) = self.candidates_per_trial {
            if m == 0 || m > self.sim.n_candidates {
                return bad(format!(
                    "candidates_per_trial {m} must be between 1 and {}",
                    self.sim.n_candidates
                ));
            }
        }
        if self.open_world {
            if self.sim.n_candidates < 2 {
                return bad("open-world runs need at least 2 candidates".into());
            }
            if self.calibration_trials == 0 {
                return bad("open-world runs need at least 1 calibration trial".into());
            }
        }
        // pool speakers alternate M/F, so the smaller gender has floor(n/2)
        let smallest_gender_pool = self.sim.n_pool_speakers / 2
            * self.sim.pool_granularity.entries_per_speaker(self.sim.utterances_per_speaker);
        let needed = self.policy.strategy.required_pool();
        if needed > smallest_gender_pool {
            return Err(Error::PoolTooSmall {
                needed,
                available: smallest_gender_pool,
            });
        }
        Ok(())
    }

    /// The resolved config as config-file text.
    pub fn to_config_text(&self) -> String {
        let level = match self.policy.level {
            ApplicationLevel::Speaker => "speaker",
            ApplicationLevel::Utterance => "utterance",
        };
        let gender_mode = match self.policy.gender_mode {
            GenderMode::SameGender => "same",
            GenderMode::OppositeGender => "opposite",
        };
        let cpt = self
            .candidates_per_trial
            .map_or_else(|| "all".to_string(), |m| m.to_string());
        let granularity = match self.sim.pool_granularity {
            PoolGranularity::Utterance => "utterance",
            PoolGranularity::Speaker => "speaker",
        };
        let mut s = String::new();
        let pairs: [(&str, String); 23] = [
            ("seed", self.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("dim", self.sim.dim.to_string()),
            ("pool_speakers", self.sim.n_pool_speakers.to_string()),
            ("candidates", self.sim.n_candidates.to_string()),
            ("utterances_per_speaker", self.sim.utterances_per_speaker.to_string()),
            ("pool_granularity", granularity.to_string()),
            ("sigma_utt", self.sim.sigma_utt.to_string()),
            ("sigma_ext", self.sim.sigma_ext.to_string()),
            ("lambda_leak", self.sim.lambda_leak.to_string()),
            ("policy", self.policy.strategy.to_string()),
            ("level", level.to_string()),
            ("gender_mode", gender_mode.to_string()),
            ("exclude_own_speaker", self.policy.exclude_own_speaker.to_string()),
            ("knowledge", self.knowledge.to_string()),
            ("open_world", self.open_world.to_string()),
            ("presence_probability", self.presence_probability.to_string()),
            ("threshold_percentile", self.threshold_percentile.to_string()),
            ("calibration_trials", self.calibration_trials.to_string()),
            ("replications", self.replications.to_string()),
            ("candidates_per_trial", cpt),
            ("per_trial_world", self.per_trial_world.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = ExperimentConfig::parse("", Path::new("x")).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn parses_keys_and_comments() {
        let text = "# demo\nseed = 9\npolicy = 50-nearest  # shorthand\nknowledge=different\n\nlambda_leak = 0\nopen_world = true\ncandidates_per_trial = 10\n";
        let c = ExperimentConfig::parse(text, Path::new("demo.cfg")).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.policy.strategy, SelectionStrategy::RankedNearest { world: 50, subset: 25 });
        assert_eq!(c.knowledge, KnowledgeLevel::Different);
        assert_eq!(c.sim.lambda_leak, 0.0);
        assert!(c.open_world);
        assert_eq!(c.candidates_per_trial, Some(10));
        assert_eq!(c.world_params().seed, 9);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::parse("seed = 1\nbogus = 2\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = ExperimentConfig::parse("trials = many\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = ExperimentConfig::parse("\n\njust text\n", Path::new("a.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn config_text_round_trips() {
        let mut c = ExperimentConfig::default();
        for (k, v) in [
            ("seed", "18446744073709551615"),
            ("sigma_ext", "0.0123456789"),
            ("policy", "random-average:40"),
            ("level", "utterance"),
            ("gender_mode", "opposite"),
            ("candidates_per_trial", "7"),
            ("output_dir", "runs/a"),
        ] {
            c.set(k, v).unwrap();
        }
        let back = ExperimentConfig::parse(&c.to_config_text(), Path::new("echo")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::default();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.presence_probability = 1.5;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.threshold_percentile = -1.0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.sim.n_pool_speakers = 30;
        assert!(matches!(c.validate(), Err(Error::PoolTooSmall { needed: 200, available: 60 })));
        c.sim.pool_granularity = PoolGranularity::Speaker;
        c.sim.n_pool_speakers = 300;
        assert!(matches!(c.validate(), Err(Error::PoolTooSmall { needed: 200, available: 150 })));
        let mut c = ExperimentConfig::default();
        c.candidates_per_trial = Some(30);
        assert!(c.validate().is_err());
    }

    #[test]
    fn open_world_set_size_excludes_one() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.set_size(), 29);
        c.open_world = true;
        assert_eq!(c.set_size(), 28);
        c.candidates_per_trial = Some(10);
        assert_eq!(c.set_size(), 10);
    }
}
