//! Speaker embeddings, distances and the labeled x-vector pool.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A speaker embedding: a finite, non-empty vector of reals.
///
/// X-vectors are not assumed to be unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct XVector(Vec<f64>);

impl XVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("x-vector values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("x-vector"));
        }
        Ok(XVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "x-vector dimension must be positive");
        XVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &XVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns `self / ‖self‖`.
    pub fn normalized(&self) -> Result<XVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(XVector(self.0.iter().map(|v| v / n).collect()))
    }

    pub fn scaled(&self, factor: f64) -> XVector {
        XVector(self.0.iter().map(|v| v * factor).collect())
    }
}

impl AsRef<[f64]> for XVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `1 − x·y / (‖x‖‖y‖)`, clamped to `[0, 2]`.
pub fn cosine_distance(x: &XVector, y: &XVector) -> Result<f64> {
    let dot = x.dot(y)?;
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((1.0 - dot / (nx * ny)).clamp(0.0, 2.0))
}

pub fn l2_distance(x: &XVector, y: &XVector) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.0
        .iter()
        .zip(&y.0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Coordinate-wise arithmetic mean.
pub fn mean_vector<'a, I>(vectors: I) -> Result<XVector>
where
    I: IntoIterator<Item = &'a XVector>,
{
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(Error::Empty("mean of no vectors"))?;
    let mut sum = first.0.clone();
    let mut count = 1usize;
    for v in iter {
        check_dims(sum.len(), v.dim())?;
        for (s, x) in sum.iter_mut().zip(&v.0) {
            *s += x;
        }
        count += 1;
    }
    let n = count as f64;
    Ok(XVector(sum.into_iter().map(|s| s / n).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn opposite(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }

    pub fn code(self) -> char {
        match self {
            Gender::Male => 'M',
            Gender::Female => 'F',
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(Gender::Male),
            "F" => Ok(Gender::Female),
            other => Err(Error::InvalidParameter(format!(
                "unknown gender code `{other}` (expected M or F)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoolEntry {
    pub speaker_id: String,
    pub utterance_id: String,
    pub gender: Gender,
    pub vector: XVector,
}

impl PoolEntry {
    pub fn new(
        speaker_id: impl Into<String>,
        utterance_id: impl Into<String>,
        gender: Gender,
        vector: XVector,
    ) -> Result<Self> {
        let speaker_id = speaker_id.into();
        if speaker_id.is_empty() {
            return Err(Error::InvalidParameter("empty speaker id".into()));
        }
        Ok(PoolEntry {
            speaker_id,
            utterance_id: utterance_id.into(),
            gender,
            vector,
        })
    }
}

/// An ordered pool of labeled x-vectors.
///
/// Each entry remembers its index in the pool it was first built as, so a
/// filtered pool still reports (and tie-breaks on) the original indices.
#[derive(Clone, Debug, PartialEq)]
pub struct XVectorPool {
    dim: usize,
    entries: Vec<PoolEntry>,
    origin: Vec<usize>,
}

impl XVectorPool {
    pub fn new(dim: usize, entries: Vec<PoolEntry>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("pool dimension must be positive".into()));
        }
        for e in &entries {
            check_dims(dim, e.vector.dim())?;
        }
        let origin = (0..entries.len()).collect();
        Ok(XVectorPool {
            dim,
            entries,
            origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn get(&self, position: usize) -> Option<&PoolEntry> {
        self.entries.get(position)
    }

    /// Index of the entry at `position` in the unfiltered pool.
    pub fn original_index(&self, position: usize) -> usize {
        self.origin[position]
    }

    pub fn original_indices(&self) -> &[usize] {
        &self.origin
    }

    /// Position of the entry whose original index is `index`, if present.
    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.origin.binary_search(&index).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &PoolEntry)> {
        self.origin.iter().copied().zip(&self.entries)
    }

    pub fn count_gender(&self, gender: Gender) -> usize {
        self.entries.iter().filter(|e| e.gender == gender).count()
    }

    fn filtered(&self, keep: impl Fn(&PoolEntry) -> bool) -> XVectorPool {
        let (origin, entries) = self
            .iter()
            .filter(|(_, e)| keep(e))
            .map(|(i, e)| (i, e.clone()))
            .unzip();
        XVectorPool {
            dim: self.dim,
            entries,
            origin,
        }
    }

    /// Pool without any entry belonging to `speaker_id`.
    pub fn without_speaker(&self, speaker_id: &str) -> XVectorPool {
        self.filtered(|e| e.speaker_id != speaker_id)
    }
}

/// Entries of `pool` with gender `gender`, in their original order.
pub fn filter_by_gender(pool: &XVectorPool, gender: Gender) -> XVectorPool {
    pool.filtered(|e| e.gender == gender)
}
