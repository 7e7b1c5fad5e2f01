//! Seeded synthetic dataset generator with ground truth.
//!
//! Identities are points in a hypercube, kept apart by rejection sampling;
//! faces are identity centers plus isotropic Gaussian noise. Child faces
//! cluster tightly around one shared center, mirroring the small margins
//! real embedders give to children's faces. Everything is a pure function
//! of the seed.

use std::collections::BTreeSet;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::embedding::{l2_distance, EmbeddingVector, FaceRecord};
use crate::error::{Error, Result};
use crate::filtering::Anchor;
use crate::ingest::{GroundTruth, ProfileCollection};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_persons: usize,
    /// Fraction of persons present in both networks.
    pub alignment_rate: f64,
    /// Inclusive range of photos per profile.
    pub photos_per_profile: (usize, usize),
    pub dimension: usize,
    /// Probability that a non-child photo shows the owner.
    pub owner_face_fraction: f64,
    /// Shared friend identities drawn on non-owner photos.
    pub friend_pool_size: usize,
    /// Probability that a photo shows a child face.
    pub child_face_fraction: f64,
    /// Per-axis Gaussian noise around an identity center.
    pub intra_identity_noise: f64,
    /// Minimum pairwise distance between identity centers.
    pub identity_separation: f64,
    /// Inclusive pixel-count range for face crops.
    pub quality_distribution: (u64, u64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_persons: 300,
            alignment_rate: 0.66,
            photos_per_profile: (50, 500),
            dimension: 32,
            owner_face_fraction: 0.6,
            friend_pool_size: 50,
            child_face_fraction: 0.0,
            intra_identity_noise: 0.05,
            identity_separation: 1.0,
            quality_distribution: (2_500, 40_000),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&content).map_err(|e| Error::parse(path, 1, e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.n_persons == 0 {
            return Err(Error::InvalidConfig("n_persons must be >= 1".into()));
        }
        if !(self.alignment_rate > 0.0 && self.alignment_rate <= 1.0) {
            return Err(Error::InvalidFraction(self.alignment_rate));
        }
        if !(self.owner_face_fraction > 0.0 && self.owner_face_fraction <= 1.0) {
            return Err(Error::InvalidFraction(self.owner_face_fraction));
        }
        if !(0.0..1.0).contains(&self.child_face_fraction) {
            return Err(Error::InvalidFraction(self.child_face_fraction));
        }
        if self.photos_per_profile.0 == 0 || self.photos_per_profile.0 > self.photos_per_profile.1 {
            return Err(Error::InvalidConfig(
                "photos_per_profile range must be non-empty and start at >= 1".into(),
            ));
        }
        if self.quality_distribution.0 > self.quality_distribution.1 {
            return Err(Error::InvalidConfig(
                "quality_distribution range is inverted".into(),
            ));
        }
        if self.intra_identity_noise < 0.0 {
            return Err(Error::InvalidConfig("noise must be non-negative".into()));
        }
        if self.identity_separation <= 0.0 {
            return Err(Error::InvalidConfig("separation must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub source: ProfileCollection,
    pub target: ProfileCollection,
    pub truth: GroundTruth,
    /// (profile_id, photo_id) of every generated child face, per network.
    pub child_records: BTreeSet<(String, String)>,
    /// Anchor built from the known child faces.
    pub child_anchor: Option<Anchor>,
}

const MAX_REJECTION_ATTEMPTS: usize = 10_000;

fn draw_centers(
    rng: &mut ChaCha8Rng,
    count: usize,
    dimension: usize,
    separation: f64,
) -> Result<Vec<EmbeddingVector>> {
    // Keep typical center distances a small multiple of the separation so
    // cross-identity distances stay on a realistic scale, but never shrink
    // the cube below what sphere packing needs.
    let d = dimension as f64;
    // ln of the unit-ball volume at radius separation/2, via the
    // dimension recursion V_d = V_{d-2} * 2*pi*r^2 / d
    let r = separation / 2.0;
    let mut ln_vol = if dimension % 2 == 0 {
        0.0
    } else {
        (2.0 * r).ln()
    };
    let mut k = if dimension % 2 == 0 { 2 } else { 3 };
    while k <= dimension {
        ln_vol += (2.0 * std::f64::consts::PI * r * r / k as f64).ln();
        k += 2;
    }
    // cube volume >= count * ball volume / 0.3 keeps rejection cheap
    let side_packing = ((count as f64 / 0.3).ln() + ln_vol).exp().powf(1.0 / d);
    let side_typical = 3.0 * separation * (6.0 / d).sqrt();
    let side = side_packing.max(side_typical);
    draw_centers_in(rng, count, dimension, separation, side)
}

fn draw_centers_in(
    rng: &mut ChaCha8Rng,
    count: usize,
    dimension: usize,
    separation: f64,
    side: f64,
) -> Result<Vec<EmbeddingVector>> {
    let mut centers: Vec<EmbeddingVector> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            let candidate = EmbeddingVector::new(
                (0..dimension).map(|_| rng.gen_range(0.0..side)).collect(),
            )?;
            let ok = centers
                .iter()
                .all(|c| l2_distance(c, &candidate).unwrap() >= separation);
            if ok {
                centers.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasibleSeparation {
                needed: count,
                separation,
                attempts: MAX_REJECTION_ATTEMPTS,
            });
        }
    }
    Ok(centers)
}

fn noisy(center: &EmbeddingVector, sigma: f64, rng: &mut ChaCha8Rng) -> EmbeddingVector {
    if sigma == 0.0 {
        return center.clone();
    }
    let normal = Normal::new(0.0, sigma).unwrap();
    EmbeddingVector::new(
        center
            .values()
            .iter()
            .map(|c| c + normal.sample(rng))
            .collect(),
    )
    .unwrap()
}

// Two pseudo-words per person; identical across networks so the name
// baseline has signal.
fn person_name(rng: &mut ChaCha8Rng) -> String {
    const SYLLABLES: &[&str] = &[
        "an", "bo", "ka", "li", "mar", "ni", "or", "pet", "ra", "so", "ta", "vi",
    ];
    let word = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(2..4);
        (0..n)
            .map(|_| SYLLABLES[rng.gen_range(0..SYLLABLES.len())])
            .collect::<String>()
    };
    format!("{} {}", word(rng), word(rng))
}

pub fn generate_dataset(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sigma = cfg.intra_identity_noise;
    let child_sigma = sigma / 2.0;

    // person centers, friend centers, and one child center drawn together so
    // everything respects the separation
    let total = cfg.n_persons + cfg.friend_pool_size + 1;
    let centers = draw_centers(&mut rng, total, cfg.dimension, cfg.identity_separation)?;
    let person_centers = &centers[..cfg.n_persons];
    let friend_centers = &centers[cfg.n_persons..cfg.n_persons + cfg.friend_pool_size];
    let child_center = &centers[total - 1];

    // aligned persons appear in both networks
    let mut person_order: Vec<usize> = (0..cfg.n_persons).collect();
    use rand::seq::SliceRandom;
    person_order.shuffle(&mut rng);
    let aligned_count = (cfg.alignment_rate * cfg.n_persons as f64).floor() as usize;
    let aligned: BTreeSet<usize> = person_order[..aligned_count].iter().copied().collect();

    let names: Vec<String> = (0..cfg.n_persons).map(|_| person_name(&mut rng)).collect();

    let mut source = ProfileCollection::new("source", cfg.dimension);
    let mut target = ProfileCollection::new("target", cfg.dimension);
    let mut child_records = BTreeSet::new();
    let mut child_faces: Vec<EmbeddingVector> = Vec::new();
    let mut truth_pairs = Vec::new();

    for person in 0..cfg.n_persons {
        let source_id = format!("s{person:05}");
        let target_id = format!("t{person:05}");
        let in_target = aligned.contains(&person);
        if in_target {
            truth_pairs.push((source_id.clone(), target_id.clone()));
        }
        for (network, profile_id) in [(0usize, &source_id), (1usize, &target_id)] {
            if network == 1 && !in_target {
                continue;
            }
            let photo_count =
                rng.gen_range(cfg.photos_per_profile.0..=cfg.photos_per_profile.1);
            let mut records = Vec::with_capacity(photo_count);
            let mut avatar_set = false;
            for photo in 0..photo_count {
                let photo_id = format!("p{photo:05}");
                let is_child = rng.gen_bool(cfg.child_face_fraction);
                let embedding = if is_child {
                    let v = noisy(child_center, child_sigma, &mut rng);
                    child_records.insert((profile_id.clone(), photo_id.clone()));
                    child_faces.push(v.clone());
                    v
                } else if rng.gen_bool(cfg.owner_face_fraction) {
                    noisy(&person_centers[person], sigma, &mut rng)
                } else {
                    let friend = if cfg.friend_pool_size > 0 {
                        &friend_centers[rng.gen_range(0..cfg.friend_pool_size)]
                    } else {
                        &person_centers[(person + 1) % cfg.n_persons]
                    };
                    noisy(friend, sigma, &mut rng)
                };
                let is_owner = !is_child
                    && l2_distance(&embedding, &person_centers[person]).unwrap()
                        < cfg.identity_separation / 2.0;
                let is_avatar = is_owner && !avatar_set;
                if is_avatar {
                    avatar_set = true;
                }
                records.push(FaceRecord {
                    profile_id: profile_id.clone(),
                    photo_id,
                    embedding,
                    pixel_count: rng
                        .gen_range(cfg.quality_distribution.0..=cfg.quality_distribution.1),
                    is_avatar,
                });
            }
            let collection = if network == 0 { &mut source } else { &mut target };
            collection.records.insert(profile_id.clone(), records);
            collection
                .names
                .insert(profile_id.clone(), names[person].clone());
        }
    }

    let child_anchor = if child_faces.is_empty() {
        None
    } else {
        Some(crate::filtering::build_anchor(
            child_faces.iter(),
            0.8,
            "children",
        )?)
    };

    Ok(SynthDataset {
        source,
        target,
        truth: GroundTruth::from_pairs(truth_pairs)?,
        child_records,
        child_anchor,
    })
}

/// Writes the dataset in the ingest file formats under `dir`:
/// source/faces.jsonl, source/names.tsv, target/..., truth.tsv, and
/// anchor.json when child faces were generated.
pub fn write_dataset(dataset: &SynthDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    for (sub, collection) in [("source", &dataset.source), ("target", &dataset.target)] {
        let subdir = dir.join(sub);
        std::fs::create_dir_all(&subdir).map_err(|e| Error::io(&subdir, e))?;
        crate::ingest::write_face_records(collection, subdir.join("faces.jsonl"))?;
        crate::ingest::write_names(collection, subdir.join("names.tsv"))?;
    }
    crate::ingest::write_ground_truth(&dataset.truth, dir.join("truth.tsv"))?;
    if let Some(anchor) = &dataset.child_anchor {
        crate::filtering::write_anchor(anchor, dir.join("anchor.json"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SynthConfig {
        SynthConfig {
            n_persons: 20,
            alignment_rate: 0.5,
            photos_per_profile: (5, 15),
            dimension: 16,
            owner_face_fraction: 0.7,
            friend_pool_size: 10,
            child_face_fraction: 0.0,
            intra_identity_noise: 0.05,
            identity_separation: 1.0,
            quality_distribution: (1_000, 20_000),
            seed: 42,
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = generate_dataset(&small_cfg()).unwrap();
        let b = generate_dataset(&small_cfg()).unwrap();
        assert_eq!(a.source, b.source);
        assert_eq!(a.target, b.target);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.child_records, b.child_records);
    }

    #[test]
    fn truth_size_follows_alignment_rate() {
        let d = generate_dataset(&small_cfg()).unwrap();
        assert_eq!(d.truth.v(), 10); // floor(0.5 * 20)
        assert_eq!(d.source.records.len(), 20);
        assert_eq!(d.target.records.len(), 10);
    }

    #[test]
    fn noiseless_aligned_identities_are_exact_duplicates() {
        let cfg = SynthConfig {
            intra_identity_noise: 0.0,
            owner_face_fraction: 1.0,
            alignment_rate: 1.0,
            friend_pool_size: 0,
            ..small_cfg()
        };
        let d = generate_dataset(&cfg).unwrap();
        for (source_id, target_id) in &d.truth.pairs {
            let s = &d.source.records[source_id][0];
            let t = &d.target.records[target_id][0];
            assert_eq!(s.embedding, t.embedding);
        }
    }

    #[test]
    fn owner_noise_has_expected_scale() {
        let cfg = SynthConfig {
            n_persons: 2,
            photos_per_profile: (2000, 2000),
            owner_face_fraction: 1.0,
            friend_pool_size: 0,
            alignment_rate: 1.0,
            ..small_cfg()
        };
        let d = generate_dataset(&cfg).unwrap();
        // per-axis standard deviation over all owner faces of one profile
        let records = d.source.records.values().next().unwrap();
        let dim = cfg.dimension;
        let mut mean = vec![0.0; dim];
        for r in records {
            for (m, x) in mean.iter_mut().zip(r.embedding.values()) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= records.len() as f64;
        }
        let mut var = 0.0;
        for r in records {
            for (m, x) in mean.iter().zip(r.embedding.values()) {
                var += (x - m) * (x - m);
            }
        }
        let sd = (var / (records.len() * dim) as f64).sqrt();
        assert!(
            (sd - cfg.intra_identity_noise).abs() < 0.005,
            "per-axis sd {sd} vs sigma {}",
            cfg.intra_identity_noise
        );
    }

    #[test]
    fn child_faces_sit_inside_the_anchor() {
        let cfg = SynthConfig {
            child_face_fraction: 0.2,
            ..small_cfg()
        };
        let d = generate_dataset(&cfg).unwrap();
        let anchor = d.child_anchor.as_ref().unwrap();
        let mut inside = 0usize;
        let mut total = 0usize;
        for collection in [&d.source, &d.target] {
            for (pid, records) in &collection.records {
                for r in records {
                    if d.child_records.contains(&(pid.clone(), r.photo_id.clone())) {
                        total += 1;
                        if l2_distance(&r.embedding, &anchor.vector).unwrap() <= anchor.radius {
                            inside += 1;
                        }
                    }
                }
            }
        }
        assert!(total > 0);
        assert!(inside as f64 >= 0.95 * total as f64, "{inside}/{total}");
    }

    #[test]
    fn infeasible_separation_errors_out() {
        // five points pairwise >= 1 cannot fit in [0, 1]
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            draw_centers_in(&mut rng, 5, 1, 1.0, 1.0),
            Err(Error::InfeasibleSeparation { .. })
        ));
    }

    #[test]
    fn separation_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let centers = draw_centers(&mut rng, 30, 8, 1.0).unwrap();
        for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                assert!(l2_distance(&centers[i], &centers[j]).unwrap() >= 1.0);
            }
        }
    }
}
