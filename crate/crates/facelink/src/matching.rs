//! Cross-network linking: each source defining vector is matched to the
//! nearest target defining vector, accepted when the distance is within
//! the threshold.
//!
//! This is the performance-critical all-pairs path; distances run over
//! contiguous slices in a flat double loop. Search is exact.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::embedding::{l2_distance, DefiningVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoPairReason {
    /// The source profile has no owner, so there is nothing to compare.
    NoOwnerSource,
    /// No target profile has an owner.
    NoCandidate,
    /// The nearest target is farther than the threshold distance.
    AboveThreshold,
}

impl NoPairReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoPairReason::NoOwnerSource => "no_owner_source",
            NoPairReason::NoCandidate => "no_candidate",
            NoPairReason::AboveThreshold => "above_threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Matched { target_profile_id: String, distance: f64 },
    NoPair(NoPairReason),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub source_profile_id: String,
    pub decision: Decision,
}

impl MatchResult {
    pub fn is_matched(&self) -> bool {
        matches!(self.decision, Decision::Matched { .. })
    }
}

/// Per-source nearest-neighbor matching. Ties on distance break toward the
/// lexicographically smallest target profile id. With `unique` set, targets
/// are assigned greedily by ascending distance so each is used at most once.
pub fn match_networks(
    source: &[DefiningVector],
    target: &[DefiningVector],
    threshold_distance: f64,
    unique: bool,
) -> Result<Vec<MatchResult>> {
    if unique {
        return match_unique(source, target, threshold_distance);
    }
    let candidates: Vec<&DefiningVector> = target.iter().filter(|t| t.has_owner()).collect();
    let mut results = Vec::with_capacity(source.len());
    for s in source {
        results.push(match_one(s, &candidates, threshold_distance)?);
    }
    Ok(results)
}

fn match_one(
    s: &DefiningVector,
    candidates: &[&DefiningVector],
    threshold_distance: f64,
) -> Result<MatchResult> {
    let sv = match &s.vector {
        None => {
            return Ok(MatchResult {
                source_profile_id: s.profile_id.clone(),
                decision: Decision::NoPair(NoPairReason::NoOwnerSource),
            })
        }
        Some(v) => v,
    };
    let mut best: Option<(f64, &str)> = None;
    for t in candidates {
        let tv = t.vector.as_ref().expect("candidates are owner-bearing");
        let d = l2_distance(sv, tv)?;
        let better = match best {
            None => true,
            Some((bd, bid)) => d < bd || (d == bd && t.profile_id.as_str() < bid),
        };
        if better {
            best = Some((d, &t.profile_id));
        }
    }
    let decision = match best {
        None => Decision::NoPair(NoPairReason::NoCandidate),
        Some((d, id)) if d <= threshold_distance => Decision::Matched {
            target_profile_id: id.to_string(),
            distance: d,
        },
        Some(_) => Decision::NoPair(NoPairReason::AboveThreshold),
    };
    Ok(MatchResult {
        source_profile_id: s.profile_id.clone(),
        decision,
    })
}

/// Greedy one-to-one assignment: repeatedly take the globally smallest
/// remaining (source, target) distance within the threshold.
fn match_unique(
    source: &[DefiningVector],
    target: &[DefiningVector],
    threshold_distance: f64,
) -> Result<Vec<MatchResult>> {
    let candidates: Vec<(usize, &DefiningVector)> = target
        .iter()
        .enumerate()
        .filter(|(_, t)| t.has_owner())
        .collect();
    // (distance, source idx, target id) for every admissible pair
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (si, s) in source.iter().enumerate() {
        if let Some(sv) = &s.vector {
            for (ci, (_, t)) in candidates.iter().enumerate() {
                let d = l2_distance(sv, t.vector.as_ref().unwrap())?;
                if d <= threshold_distance {
                    edges.push((d, si, ci));
                }
            }
        }
    }
    edges.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| source[a.1].profile_id.cmp(&source[b.1].profile_id))
            .then_with(|| candidates[a.2].1.profile_id.cmp(&candidates[b.2].1.profile_id))
    });
    let mut source_done = vec![false; source.len()];
    let mut target_used = vec![false; candidates.len()];
    let mut assigned: Vec<Option<(String, f64)>> = vec![None; source.len()];
    for (d, si, ci) in edges {
        if !source_done[si] && !target_used[ci] {
            source_done[si] = true;
            target_used[ci] = true;
            assigned[si] = Some((candidates[ci].1.profile_id.clone(), d));
        }
    }
    let mut results = Vec::with_capacity(source.len());
    for (si, s) in source.iter().enumerate() {
        let decision = match (&s.vector, assigned[si].take()) {
            (None, _) => Decision::NoPair(NoPairReason::NoOwnerSource),
            (_, Some((id, d))) => Decision::Matched {
                target_profile_id: id,
                distance: d,
            },
            (Some(_), None) if candidates.is_empty() => Decision::NoPair(NoPairReason::NoCandidate),
            (Some(_), None) => Decision::NoPair(NoPairReason::AboveThreshold),
        };
        results.push(MatchResult {
            source_profile_id: s.profile_id.clone(),
            decision,
        });
    }
    Ok(results)
}

/// Writes results as tab-separated source, target-or-"-", distance-or-"-",
/// reason.
pub fn write_match_file(results: &[MatchResult], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in results {
        match &r.decision {
            Decision::Matched {
                target_profile_id,
                distance,
            } => writeln!(
                w,
                "{}\t{}\t{:.6}\tmatched",
                r.source_profile_id, target_profile_id, distance
            ),
            Decision::NoPair(reason) => writeln!(
                w,
                "{}\t-\t-\t{}",
                r.source_profile_id,
                reason.as_str()
            ),
        }
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
