//! Privacy metrics over attack trials.
//!
//! Scores are distances: lower means "more likely present". A threshold `t`
//! accepts every score `≤ t`, matching [`crate::attack::open_world_decide`].

use crate::anonymizer::PseudoXVector;
use crate::attack::{AttackOutcome, OpenWorldDecision};
use crate::embedding::{cosine_distance, XVector};
use crate::error::{Error, Result};

/// One attack trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_id: usize,
    /// The target when it is among the candidates; `None` when absent.
    pub truth: Option<String>,
    pub outcome: AttackOutcome,
    pub decision: Option<OpenWorldDecision>,
    /// Prediction of the naive baseline on the same observation.
    pub naive_prediction: Option<String>,
    /// Cosine distance between the target's x-vector and its pseudo x-vector.
    pub utility: Option<f64>,
}

impl TrialRecord {
    pub fn present_truth(&self) -> bool {
        self.truth.is_some()
    }

    pub fn is_correct(&self) -> bool {
        self.truth.as_deref() == Some(self.outcome.predicted_id.as_str())
    }
}

fn closed_world(trials: &[TrialRecord]) -> Result<()> {
    if trials.is_empty() {
        return Err(Error::Empty("trial list"));
    }
    if trials.iter().any(|t| !t.present_truth()) {
        return Err(Error::InvalidParameter(
            "accuracy is defined on closed-world trials only".into(),
        ));
    }
    Ok(())
}

/// Fraction of closed-world trials whose prediction is the target.
pub fn accuracy(trials: &[TrialRecord]) -> Result<f64> {
    closed_world(trials)?;
    Ok(trials.iter().filter(|t| t.is_correct()).count() as f64 / trials.len() as f64)
}

/// Same as [`accuracy`] but for the naive baseline's predictions.
pub fn naive_accuracy(trials: &[TrialRecord]) -> Result<Option<f64>> {
    closed_world(trials)?;
    if trials.iter().any(|t| t.naive_prediction.is_none()) {
        return Ok(None);
    }
    let hits = trials
        .iter()
        .filter(|t| t.naive_prediction.as_deref() == t.truth.as_deref())
        .count();
    Ok(Some(hits as f64 / trials.len() as f64))
}

/// Operating points `(fpr, tpr)` from `(0,0)` to `(1,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let malformed = |m: &str| Err(Error::InvalidParameter(format!("malformed ROC curve: {m}")));
        if points.len() < 2 {
            return malformed("fewer than two points");
        }
        if points.first() != Some(&(0.0, 0.0)) || points.last() != Some(&(1.0, 1.0)) {
            return malformed("must run from (0,0) to (1,1)");
        }
        if points.iter().any(|&(f, t)| !(0.0..=1.0).contains(&f) || !(0.0..=1.0).contains(&t)) {
            return malformed("rates outside [0,1]");
        }
        if points.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1) {
            return malformed("rates must be non-decreasing");
        }
        Ok(RocCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

fn check_scores(present: &[f64], absent: &[f64]) -> Result<()> {
    if present.is_empty() {
        return Err(Error::Empty("present scores"));
    }
    if absent.is_empty() {
        return Err(Error::Empty("absent scores"));
    }
    if present.iter().chain(absent).any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("score"));
    }
    Ok(())
}

/// `(threshold, fpr, tpr)` at every distinct score, ascending, preceded by
/// the reject-all point.
fn sweep(present: &[f64], absent: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut p = present.to_vec();
    let mut a = absent.to_vec();
    p.sort_by(f64::total_cmp);
    a.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = p.iter().chain(&a).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let (np, na) = (p.len() as f64, a.len() as f64);
    let (mut ip, mut ia) = (0usize, 0usize);
    let mut out = Vec::with_capacity(thresholds.len() + 1);
    out.push((f64::NEG_INFINITY, 0.0, 0.0));
    for t in thresholds {
        while ip < p.len() && p[ip] <= t {
            ip += 1;
        }
        while ia < a.len() && a[ia] <= t {
            ia += 1;
        }
        out.push((t, ia as f64 / na, ip as f64 / np));
    }
    out
}

pub fn roc_curve(present_scores: &[f64], absent_scores: &[f64]) -> Result<RocCurve> {
    check_scores(present_scores, absent_scores)?;
    RocCurve::new(sweep(present_scores, absent_scores).into_iter().map(|(_, f, t)| (f, t)).collect())
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points()
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EerEstimate {
    pub eer: f64,
    /// Smallest `|fpr − fnr|` reached at an actual swept threshold.
    pub residual: f64,
}

/// Equal error rate, interpolated linearly between the two swept operating
/// points where `fpr − fnr` changes sign.
pub fn eer(present_scores: &[f64], absent_scores: &[f64]) -> Result<EerEstimate> {
    check_scores(present_scores, absent_scores)?;
    let points: Vec<(f64, f64)> = sweep(present_scores, absent_scores)
        .into_iter()
        .map(|(_, fpr, tpr)| (fpr, 1.0 - tpr))
        .collect();
    let residual = points
        .iter()
        .map(|(fpr, fnr)| (fpr - fnr).abs())
        .fold(f64::INFINITY, f64::min);
    // fpr − fnr climbs from −1 at reject-all to +1 at accept-all.
    let i = points
        .iter()
        .position(|(fpr, fnr)| fpr - fnr >= 0.0)
        .expect("accept-all point has fpr − fnr = 1");
    let (f1, n1) = points[i];
    let eer = if i == 0 || f1 == n1 {
        f1
    } else {
        let (f0, n0) = points[i - 1];
        let (d0, d1) = (f0 - n0, f1 - n1);
        let alpha = -d0 / (d1 - d0);
        f0 + alpha * (f1 - f0)
    };
    Ok(EerEstimate { eer, residual })
}

/// How far the pseudo voice moved from the original, as cosine distance.
pub fn utility_proxy(original_speaker_x: &XVector, pseudo: &PseudoXVector) -> Result<f64> {
    cosine_distance(original_speaker_x, &pseudo.vector)
}

/// The `ceil(q/100 · n)`-th smallest value (the minimum for `q = 0`).
pub fn nearest_rank_percentile(values: &[f64], percentile: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("value list"));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::InvalidParameter(format!("percentile {percentile} outside [0, 100]")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("percentile input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (percentile / 100.0 * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub p50: f64,
    pub p95: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Some(Summary {
            count: values.len(),
            mean,
            std: var.sqrt(),
            p50: nearest_rank_percentile(values, 50.0).ok()?,
            p95: nearest_rank_percentile(values, 95.0).ok()?,
        })
    }
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::Empty("rank correlation needs two points"));
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::InvalidParameter("rank correlation of a constant series".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}
