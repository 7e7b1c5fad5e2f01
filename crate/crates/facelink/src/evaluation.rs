//! Precision/recall/F1 computation and the experiment drivers: photo
//! sampling, alignment-rate reduction, and the quality x threshold grid.
//!
//! All randomness flows from the caller's seed. Per-profile sampling streams
//! are derived from (seed, experiment coordinates, profile id), so results
//! do not depend on iteration order or worker count.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{GroundTruth, ProfileCollection};
use crate::matching::{match_networks, Decision, MatchResult};
use crate::pipeline::{defining_vectors, run_pipeline, PipelineConfig};

/// One evaluation outcome: prediction counts and the derived metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Predictions made (matched count).
    pub k: usize,
    /// Correct predictions.
    pub k_p: usize,
    /// True pairs in the ground truth.
    pub v: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsReport {
    fn from_counts(k: usize, k_p: usize, v: usize) -> Self {
        let precision = if k > 0 { k_p as f64 / k as f64 } else { 0.0 };
        let recall = if v > 0 { k_p as f64 / v as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricsReport {
            k,
            k_p,
            v,
            precision,
            recall,
            f1,
        }
    }
}

/// Counts matched and correct predictions against the ground truth.
pub fn compute_metrics(results: &[MatchResult], truth: &GroundTruth) -> Result<MetricsReport> {
    let mut seen = HashSet::with_capacity(results.len());
    for r in results {
        if !seen.insert(r.source_profile_id.as_str()) {
            return Err(Error::DuplicateSourceId(r.source_profile_id.clone()));
        }
    }
    let mut k = 0usize;
    let mut k_p = 0usize;
    for r in results {
        if let Decision::Matched {
            target_profile_id, ..
        } = &r.decision
        {
            k += 1;
            if truth.contains(&r.source_profile_id, target_profile_id) {
                k_p += 1;
            }
        }
    }
    Ok(MetricsReport::from_counts(k, k_p, truth.v()))
}

// FNV-1a; a stable hash so per-profile streams survive across processes.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn profile_rng(seed: u64, stream: &str, profile_id: &str) -> ChaCha8Rng {
    let mix = seed
        ^ fnv1a(stream.as_bytes()).rotate_left(17)
        ^ fnv1a(profile_id.as_bytes());
    ChaCha8Rng::seed_from_u64(mix)
}

/// Keeps, per profile, a seeded sample of ceil(fraction * photo_count)
/// distinct photos (at least one); all faces on a sampled photo stay.
fn sample_photos(
    collection: &ProfileCollection,
    fraction: f64,
    seed: u64,
    stream: &str,
) -> ProfileCollection {
    let mut sampled = ProfileCollection::new(collection.network_id.clone(), collection.dimension);
    sampled.names = collection.names.clone();
    for (profile_id, records) in &collection.records {
        let mut photos: Vec<&str> = Vec::new();
        let mut seen = BTreeSet::new();
        for r in records {
            if seen.insert(r.photo_id.as_str()) {
                photos.push(&r.photo_id);
            }
        }
        let take = ((fraction * photos.len() as f64).ceil() as usize)
            .clamp(1.min(photos.len()), photos.len());
        let chosen: BTreeSet<&str> = if take == photos.len() {
            photos.iter().copied().collect()
        } else {
            let mut rng = profile_rng(seed, stream, profile_id);
            photos
                .choose_multiple(&mut rng, take)
                .copied()
                .collect()
        };
        let kept: Vec<_> = records
            .iter()
            .filter(|r| chosen.contains(r.photo_id.as_str()))
            .cloned()
            .collect();
        sampled.records.insert(profile_id.clone(), kept);
    }
    sampled
}

/// Photo-sampling protocol: per (fraction, repetition), rerun the whole
/// pipeline on a per-profile photo subsample.
pub fn run_sampling_experiment(
    source: &ProfileCollection,
    target: &ProfileCollection,
    truth: &GroundTruth,
    fractions: &[f64],
    repetitions: usize,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<Vec<(f64, usize, MetricsReport)>> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
    }
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidFraction(f));
        }
    }
    let mut out = Vec::with_capacity(fractions.len() * repetitions);
    for (fi, &fraction) in fractions.iter().enumerate() {
        for rep in 0..repetitions {
            let stream_s = format!("sample/{fi}/{rep}/source");
            let stream_t = format!("sample/{fi}/{rep}/target");
            let s = sample_photos(source, fraction, seed, &stream_s);
            let t = sample_photos(target, fraction, seed, &stream_t);
            let results = run_pipeline(&s, &t, cfg)?;
            out.push((fraction, rep, compute_metrics(&results, truth)?));
        }
    }
    Ok(out)
}

/// Partial-alignment protocol: per rate, keep a random subset of the true
/// pairs, drop the target-side profiles of the removed pairs, and evaluate
/// against the reduced truth.
pub fn run_alignment_experiment(
    source: &ProfileCollection,
    target: &ProfileCollection,
    truth: &GroundTruth,
    rates: &[f64],
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<Vec<(f64, MetricsReport)>> {
    for &r in rates {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidFraction(r));
        }
    }
    let all_pairs: Vec<(&String, &String)> = truth.pairs.iter().collect();
    let mut out = Vec::with_capacity(rates.len());
    for (ri, &rate) in rates.iter().enumerate() {
        let keep = ((rate * truth.v() as f64).floor() as usize).min(truth.v());
        let kept_pairs: Vec<(&String, &String)> = if keep == truth.v() {
            all_pairs.clone()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(format!("align/{ri}").as_bytes()));
            let mut shuffled = all_pairs.clone();
            shuffled.shuffle(&mut rng);
            shuffled.truncate(keep);
            shuffled
        };
        let reduced_truth = GroundTruth::from_pairs(
            kept_pairs
                .iter()
                .map(|(s, t)| ((*s).clone(), (*t).clone())),
        )?;
        let kept_targets: BTreeSet<&String> = kept_pairs.iter().map(|(_, t)| *t).collect();
        let dropped_targets: BTreeSet<&String> = truth
            .pairs
            .values()
            .filter(|t| !kept_targets.contains(t))
            .collect();
        let mut reduced_target =
            ProfileCollection::new(target.network_id.clone(), target.dimension);
        reduced_target.names = target.names.clone();
        for (id, records) in &target.records {
            if !dropped_targets.contains(id) {
                reduced_target.records.insert(id.clone(), records.clone());
            }
        }
        let results = run_pipeline(source, &reduced_target, cfg)?;
        out.push((rate, compute_metrics(&results, &reduced_truth)?));
    }
    Ok(out)
}

/// Quality x threshold-distance sweep. Defining vectors depend only on the
/// quality axis, so they are computed once per quality row.
pub fn run_grid(
    source: &ProfileCollection,
    target: &ProfileCollection,
    truth: &GroundTruth,
    qualities: &[u64],
    thresholds: &[f64],
    cfg: &PipelineConfig,
) -> Result<Vec<(u64, f64, MetricsReport)>> {
    if qualities.is_empty() || thresholds.is_empty() {
        return Err(Error::InvalidConfig("grid axes must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(qualities.len() * thresholds.len());
    for &q in qualities {
        let mut row_cfg = cfg.clone();
        row_cfg.quality_q = q;
        let source_dvs = defining_vectors(source, &row_cfg)?;
        let target_dvs = defining_vectors(target, &row_cfg)?;
        for &t in thresholds {
            let results = match_networks(&source_dvs, &target_dvs, t, cfg.unique)?;
            out.push((q, t, compute_metrics(&results, truth)?));
        }
    }
    Ok(out)
}

/// One CSV row per report: experiment, cell label, repetition, counts,
/// metrics.
pub struct CsvReportWriter {
    writer: BufWriter<std::fs::File>,
    path: std::path::PathBuf,
}

impl CsvReportWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(
            writer,
            "experiment,cell,repetition,K,K_p,V,precision,recall,f1"
        )
        .map_err(|e| Error::io(&path, e))?;
        Ok(CsvReportWriter { writer, path })
    }

    pub fn row(
        &mut self,
        experiment: &str,
        cell: &str,
        repetition: usize,
        m: &MetricsReport,
    ) -> Result<()> {
        writeln!(
            self.writer,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6}",
            experiment, cell, repetition, m.k, m.k_p, m.v, m.precision, m.recall, m.f1
        )
        .map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}
