//! Pseudo x-vector construction.
//!
//! A pseudo x-vector replaces a speaker's embedding before synthesis. The
//! ranked strategies pick a *world* of the `W` pool vectors nearest to (or
//! farthest from) the original x-vector by cosine distance, draw `N` of them
//! uniformly without replacement and average them. The random strategies
//! ignore the original x-vector entirely.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::embedding::{filter_by_gender, mean_vector, Gender, XVector, XVectorPool};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RankOrder {
    Nearest,
    Farthest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelectionStrategy {
    /// Average `subset` vectors drawn from the `world` nearest pool vectors.
    RankedNearest { world: usize, subset: usize },
    /// Average `subset` vectors drawn from the `world` farthest pool vectors.
    RankedFarthest { world: usize, subset: usize },
    /// Average `subset` vectors drawn from the whole pool.
    RandomAverage { subset: usize },
    /// One pool vector, copied verbatim.
    RandomSingle,
}

impl SelectionStrategy {
    pub fn rank_order(&self) -> Option<RankOrder> {
        match self {
            SelectionStrategy::RankedNearest { .. } => Some(RankOrder::Nearest),
            SelectionStrategy::RankedFarthest { .. } => Some(RankOrder::Farthest),
            _ => None,
        }
    }

    pub fn is_ranked(&self) -> bool {
        self.rank_order().is_some()
    }

    /// Number of pool vectors averaged into one pseudo x-vector.
    pub fn subset_size(&self) -> usize {
        match *self {
            SelectionStrategy::RankedNearest { subset, .. }
            | SelectionStrategy::RankedFarthest { subset, .. }
            | SelectionStrategy::RandomAverage { subset } => subset,
            SelectionStrategy::RandomSingle => 1,
        }
    }

    /// Smallest filtered pool the strategy can run against.
    pub fn required_pool(&self) -> usize {
        match *self {
            SelectionStrategy::RankedNearest { world, .. }
            | SelectionStrategy::RankedFarthest { world, .. } => world,
            SelectionStrategy::RandomAverage { subset } => subset,
            SelectionStrategy::RandomSingle => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SelectionStrategy::RankedNearest { world, subset }
            | SelectionStrategy::RankedFarthest { world, subset } => {
                if world == 0 || subset == 0 {
                    return Err(Error::InvalidPolicy("world and subset sizes must be positive".into()));
                }
                if subset > world {
                    return Err(Error::InvalidPolicy(format!(
                        "subset size {subset} exceeds world size {world}"
                    )));
                }
            }
            SelectionStrategy::RandomAverage { subset } if subset == 0 => {
                return Err(Error::InvalidPolicy("subset size must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionStrategy::RankedNearest { world, subset } => write!(f, "nearest:{world}:{subset}"),
            SelectionStrategy::RankedFarthest { world, subset } => write!(f, "farthest:{world}:{subset}"),
            SelectionStrategy::RandomAverage { subset } => write!(f, "random-average:{subset}"),
            SelectionStrategy::RandomSingle => write!(f, "random-single"),
        }
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    /// Accepts `nearest:W:N`, `farthest:W:N`, `random-average[:N]`,
    /// `random-single`, and the shorthands `200-nearest`, `200-farthest`,
    /// `50-nearest`, `50-farthest` (subset = world / 2).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPolicy(format!("cannot parse selection strategy `{s}`"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let strategy = match parts.as_slice() {
            ["nearest", w, n] => SelectionStrategy::RankedNearest { world: num(w)?, subset: num(n)? },
            ["farthest", w, n] => SelectionStrategy::RankedFarthest { world: num(w)?, subset: num(n)? },
            ["random-average"] => SelectionStrategy::RandomAverage { subset: 100 },
            ["random-average", n] => SelectionStrategy::RandomAverage { subset: num(n)? },
            ["random-single"] => SelectionStrategy::RandomSingle,
            [short] => match short.split_once('-') {
                Some((w, "nearest")) => {
                    let world = num(w)?;
                    SelectionStrategy::RankedNearest { world, subset: world / 2 }
                }
                Some((w, "farthest")) => {
                    let world = num(w)?;
                    SelectionStrategy::RankedFarthest { world, subset: world / 2 }
                }
                _ => return Err(bad()),
            },
            _ => return Err(bad()),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ApplicationLevel {
    /// One pseudo x-vector shared by all of a speaker's utterances.
    #[default]
    Speaker,
    /// An independent pseudo x-vector per utterance.
    Utterance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum GenderMode {
    #[default]
    SameGender,
    OppositeGender,
}

impl GenderMode {
    pub fn pool_gender(self, speaker: Gender) -> Gender {
        match self {
            GenderMode::SameGender => speaker,
            GenderMode::OppositeGender => speaker.opposite(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnonymizationPolicy {
    pub strategy: SelectionStrategy,
    pub level: ApplicationLevel,
    pub gender_mode: GenderMode,
    /// Drop the speaker's own pool entries before selection.
    pub exclude_own_speaker: bool,
}

impl AnonymizationPolicy {
    pub fn new(strategy: SelectionStrategy) -> Self {
        AnonymizationPolicy {
            strategy,
            level: ApplicationLevel::Speaker,
            gender_mode: GenderMode::SameGender,
            exclude_own_speaker: false,
        }
    }

    pub fn nearest(world: usize, subset: usize) -> Self {
        Self::new(SelectionStrategy::RankedNearest { world, subset })
    }

    pub fn farthest(world: usize, subset: usize) -> Self {
        Self::new(SelectionStrategy::RankedFarthest { world, subset })
    }

    pub fn random_average(subset: usize) -> Self {
        Self::new(SelectionStrategy::RandomAverage { subset })
    }

    pub fn random_single() -> Self {
        Self::new(SelectionStrategy::RandomSingle)
    }

    pub fn with_level(mut self, level: ApplicationLevel) -> Self {
        self.level = level;
        self
    }

    pub fn with_gender_mode(mut self, mode: GenderMode) -> Self {
        self.gender_mode = mode;
        self
    }

    /// Checks the policy against the size of the pool it will draw from.
    pub fn check_against(&self, filtered_pool_len: usize) -> Result<()> {
        self.strategy.validate()?;
        if filtered_pool_len == 0 {
            return Err(Error::Empty("gender-filtered pool"));
        }
        let needed = self.strategy.required_pool();
        if needed > filtered_pool_len {
            return Err(Error::PoolTooSmall {
                needed,
                available: filtered_pool_len,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoXVector {
    pub vector: XVector,
    /// Original pool indices of the averaged vectors, ascending.
    pub selected_indices: Vec<usize>,
    pub policy: AnonymizationPolicy,
}

/// The two gender halves of a pool, filtered once and reused.
#[derive(Clone, Debug)]
pub struct GenderPools {
    male: XVectorPool,
    female: XVectorPool,
}

impl GenderPools {
    pub fn new(pool: &XVectorPool) -> Self {
        GenderPools {
            male: filter_by_gender(pool, Gender::Male),
            female: filter_by_gender(pool, Gender::Female),
        }
    }

    pub fn get(&self, gender: Gender) -> &XVectorPool {
        match gender {
            Gender::Male => &self.male,
            Gender::Female => &self.female,
        }
    }

    /// The pool a speaker's pseudo x-vector is drawn from under `policy`.
    pub fn for_speaker(&self, speaker_id: &str, gender: Gender, policy: &AnonymizationPolicy) -> Cow<'_, XVectorPool> {
        let pool = self.get(policy.gender_mode.pool_gender(gender));
        if policy.exclude_own_speaker {
            Cow::Owned(pool.without_speaker(speaker_id))
        } else {
            Cow::Borrowed(pool)
        }
    }
}

/// Pool positions sorted by cosine distance to `x`; ties by ascending index.
///
/// Returns original pool indices.
pub fn rank_pool(x: &XVector, pool: &XVectorPool, order: RankOrder) -> Result<Vec<usize>> {
    Ok(rank_positions(x, pool, order, pool.len())?
        .into_iter()
        .map(|p| pool.original_index(p))
        .collect())
}

/// The first `limit` positions of the full ranking.
fn rank_positions(x: &XVector, pool: &XVectorPool, order: RankOrder, limit: usize) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::Empty("pool"));
    }
    let nx = x.norm();
    let mut scored = pool
        .entries()
        .iter()
        .enumerate()
        .map(|(pos, e)| {
            let dot = x.dot(&e.vector)?;
            let ny = e.vector.norm();
            if nx == 0.0 || ny == 0.0 {
                return Err(Error::ZeroNorm);
            }
            Ok(((1.0 - dot / (nx * ny)).clamp(0.0, 2.0), pos))
        })
        .collect::<Result<Vec<_>>>()?;
    // Positions are monotone in original index, so breaking ties on position
    // is the same as breaking them on original index.
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        let by_distance = match order {
            RankOrder::Nearest => a.0.total_cmp(&b.0),
            RankOrder::Farthest => b.0.total_cmp(&a.0),
        };
        by_distance.then(a.1.cmp(&b.1))
    };
    if limit < scored.len() {
        if limit == 0 {
            return Ok(Vec::new());
        }
        scored.select_nth_unstable_by(limit - 1, cmp);
        scored.truncate(limit);
    }
    scored.sort_by(cmp);
    Ok(scored.into_iter().map(|(_, pos)| pos).collect())
}

/// Draws `amount` of `items` uniformly without replacement (partial
/// Fisher-Yates shuffle), returned in ascending order.
fn sample_without_replacement<R: Rng + ?Sized>(mut items: Vec<usize>, amount: usize, rng: &mut R) -> Vec<usize> {
    let (chosen, _) = items.partial_shuffle(rng, amount);
    let mut chosen = chosen.to_vec();
    chosen.sort_unstable();
    chosen
}

/// Builds the pseudo x-vector for target `x`.
///
/// `pool` must already be filtered to the gender the policy draws from
/// (see [`GenderPools::for_speaker`]).
pub fn build_pseudo_xvector<R: Rng + ?Sized>(
    x: &XVector,
    pool: &XVectorPool,
    policy: &AnonymizationPolicy,
    rng: &mut R,
) -> Result<PseudoXVector> {
    let world = prepare_world(x, pool, policy)?;
    draw_pseudo(world.as_deref(), pool, policy, rng)
}

/// Validates the inputs and ranks the pool for ranked strategies.
fn prepare_world(x: &XVector, pool: &XVectorPool, policy: &AnonymizationPolicy) -> Result<Option<Vec<usize>>> {
    policy.check_against(pool.len())?;
    if x.dim() != pool.dim() {
        return Err(Error::DimensionMismatch {
            expected: pool.dim(),
            found: x.dim(),
        });
    }
    match policy.strategy {
        SelectionStrategy::RankedNearest { world, .. } | SelectionStrategy::RankedFarthest { world, .. } => {
            let order = policy.strategy.rank_order().expect("ranked strategy");
            rank_positions(x, pool, order, world).map(Some)
        }
        _ => Ok(None),
    }
}

fn draw_pseudo<R: Rng + ?Sized>(
    world: Option<&[usize]>,
    pool: &XVectorPool,
    policy: &AnonymizationPolicy,
    rng: &mut R,
) -> Result<PseudoXVector> {
    let positions = match (policy.strategy, world) {
        (SelectionStrategy::RandomSingle, _) => vec![rng.random_range(0..pool.len())],
        (SelectionStrategy::RandomAverage { subset }, _) => {
            sample_without_replacement((0..pool.len()).collect(), subset, rng)
        }
        (strategy, Some(world)) => sample_without_replacement(world.to_vec(), strategy.subset_size(), rng),
        (_, None) => unreachable!("ranked strategies always have a world"),
    };

    let vector = if let [only] = positions.as_slice() {
        pool.entries()[*only].vector.clone()
    } else {
        mean_vector(positions.iter().map(|&p| &pool.entries()[p].vector))?
    };
    Ok(PseudoXVector {
        vector,
        selected_indices: positions.into_iter().map(|p| pool.original_index(p)).collect(),
        policy: policy.clone(),
    })
}

/// One speaker's anonymization with the pool ranking done once, for
/// repeated draws. Each [`PreparedSpeaker::anonymize`] call consumes `rng`
/// exactly like [`anonymize_speaker`] would.
#[derive(Clone, Debug)]
pub struct PreparedSpeaker<'a> {
    pool: &'a XVectorPool,
    policy: &'a AnonymizationPolicy,
    utterances: usize,
    /// One world per target: the speaker mean, or each utterance.
    worlds: Vec<Option<Vec<usize>>>,
}

impl<'a> PreparedSpeaker<'a> {
    pub fn new(utterances: &[XVector], pool: &'a XVectorPool, policy: &'a AnonymizationPolicy) -> Result<Self> {
        if utterances.is_empty() {
            return Err(Error::Empty("speaker utterances"));
        }
        let worlds = match policy.level {
            ApplicationLevel::Speaker => vec![prepare_world(&mean_vector(utterances)?, pool, policy)?],
            ApplicationLevel::Utterance => utterances
                .iter()
                .map(|u| prepare_world(u, pool, policy))
                .collect::<Result<_>>()?,
        };
        Ok(PreparedSpeaker {
            pool,
            policy,
            utterances: utterances.len(),
            worlds,
        })
    }

    /// One pseudo x-vector per utterance, in input order.
    pub fn anonymize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<PseudoXVector>> {
        match self.policy.level {
            ApplicationLevel::Speaker => {
                let pseudo = draw_pseudo(self.worlds[0].as_deref(), self.pool, self.policy, rng)?;
                Ok(vec![pseudo; self.utterances])
            }
            ApplicationLevel::Utterance => self
                .worlds
                .iter()
                .map(|w| draw_pseudo(w.as_deref(), self.pool, self.policy, rng))
                .collect(),
        }
    }
}

/// Anonymizes all utterances of one speaker; one pseudo x-vector per
/// utterance, in input order.
pub fn anonymize_speaker<R: Rng + ?Sized>(
    utterances: &[XVector],
    pool: &XVectorPool,
    policy: &AnonymizationPolicy,
    rng: &mut R,
) -> Result<Vec<PseudoXVector>> {
    PreparedSpeaker::new(utterances, pool, policy)?.anonymize(rng)
}
