//! Pool files.
//!
//! ```text
//! dim=<k>
//! speaker_id,gender,utterance_id,v1,...,vk
//! ```
//!
//! `gender` is `M` or `F`. Values are written with 17 significant digits so
//! they read back bit-identically. Blank lines are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::embedding::{Gender, PoolEntry, XVector, XVectorPool};
use crate::error::{Error, Result};
use crate::world::SpeakerWorld;

pub fn format_pool(pool: &XVectorPool) -> String {
    let mut out = format!("dim={}\n", pool.dim());
    for e in pool.entries() {
        let _ = write!(out, "{},{},{}", e.speaker_id, e.gender, e.utterance_id);
        for v in e.vector.as_slice() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_pool(pool: &XVectorPool, path: &Path) -> Result<()> {
    fs::write(path, format_pool(pool)).map_err(|e| Error::io(path, e))
}

/// Parses pool-file text; `path` is only used in error messages.
pub fn parse_pool(text: &str, path: &Path) -> Result<XVectorPool> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `dim=<k>` header"))?;
    let dim = header
        .trim()
        .strip_prefix("dim=")
        .and_then(|d| d.trim().parse::<usize>().ok())
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::parse(path, hline + 1, format!("expected `dim=<k>` header, found `{header}`")))?;

    let mut entries = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != dim + 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "ragged row: expected {dim} values, found {}",
                    fields.len().saturating_sub(3)
                ),
            ));
        }
        let gender: Gender = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("unknown gender code `{}`", fields[1])))?;
        let values = fields[3..]
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(path, lineno, format!("non-finite or unparsable value `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let vector = XVector::new(values).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let entry = PoolEntry::new(fields[0], fields[2], gender, vector)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        entries.push(entry);
    }
    XVectorPool::new(dim, entries)
}

/// Reads and validates a pool file.
pub fn ingest_pool(path: &Path) -> Result<XVectorPool> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pool(&text, path)
}

/// The attacker-held candidate utterances of a world, one row per utterance.
pub fn candidate_pool(world: &SpeakerWorld) -> Result<XVectorPool> {
    let entries = world
        .candidates
        .iter()
        .zip(&world.enrollment)
        .flat_map(|(s, utts)| {
            utts.iter()
                .enumerate()
                .map(move |(j, u)| PoolEntry::new(s.speaker_id.clone(), format!("utt-{j:02}"), s.gender, u.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    XVectorPool::new(world.params.dim, entries)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolSummary {
    pub entries: usize,
    pub dim: usize,
    pub speakers: usize,
    pub male: usize,
    pub female: usize,
}

impl PoolSummary {
    pub fn of(pool: &XVectorPool) -> Self {
        let mut ids: Vec<&str> = pool.entries().iter().map(|e| e.speaker_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        PoolSummary {
            entries: pool.len(),
            dim: pool.dim(),
            speakers: ids.len(),
            male: pool.count_gender(Gender::Male),
            female: pool.count_gender(Gender::Female),
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "entries,dim,speakers,male,female\n{},{},{},{},{}\n",
            self.entries, self.dim, self.speakers, self.male, self.female
        )
    }
}
