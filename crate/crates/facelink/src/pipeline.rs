//! End-to-end pipeline driver: filter records, cluster per profile,
//! identify owners, match across networks.

use rayon::prelude::*;

use crate::clustering::cluster_single_linkage;
use crate::embedding::DefiningVector;
use crate::error::Result;
use crate::filtering::{filter_anchor, filter_quality, Anchor};
use crate::ingest::ProfileCollection;
use crate::matching::{match_networks, MatchResult};
use crate::owner::{avatar_defining_vector, identify_owner, OwnerConfig};

/// All pipeline knobs. Defaults are the best-reported operating point:
/// quality 80, cluster threshold 0.8, two clusters, minimum cluster size 2,
/// threshold distance 0.65, name threshold 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub quality_q: u64,
    pub cluster_threshold: f64,
    pub k_clusters: usize,
    pub min_cluster_size: usize,
    pub threshold_distance: f64,
    pub name_threshold: usize,
    pub avatars_only: bool,
    pub unique: bool,
    pub anchors: Vec<Anchor>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            quality_q: 80,
            cluster_threshold: 0.8,
            k_clusters: 2,
            min_cluster_size: 2,
            threshold_distance: 0.65,
            name_threshold: 4,
            avatars_only: false,
            unique: false,
            anchors: Vec::new(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn owner_config(&self) -> OwnerConfig {
        OwnerConfig {
            k_clusters: self.k_clusters,
            min_cluster_size: self.min_cluster_size,
            avatars_only: self.avatars_only,
        }
    }
}

/// Filter, cluster, and identify the owner of every profile in a
/// collection. Profiles iterate in id order; per-profile work runs on the
/// current rayon pool and results keep the id order.
pub fn defining_vectors(
    collection: &ProfileCollection,
    cfg: &PipelineConfig,
) -> Result<Vec<DefiningVector>> {
    let entries: Vec<(&String, &Vec<crate::embedding::FaceRecord>)> =
        collection.records.iter().collect();
    entries
        .par_iter()
        .map(|(profile_id, records)| {
            let records = filter_quality(records, cfg.quality_q);
            let records = filter_anchor(&records, &cfg.anchors)?;
            if records.is_empty() {
                return Ok(DefiningVector::no_owner(profile_id.as_str()));
            }
            let mut dv = if cfg.avatars_only {
                avatar_defining_vector(&records)?
            } else {
                let clusters = cluster_single_linkage(&records, cfg.cluster_threshold)?;
                identify_owner(&records, &clusters, &cfg.owner_config())?
            };
            dv.profile_id = profile_id.to_string();
            Ok(dv)
        })
        .collect()
}

/// Full run: defining vectors on both sides, then nearest-neighbor matching.
pub fn run_pipeline(
    source: &ProfileCollection,
    target: &ProfileCollection,
    cfg: &PipelineConfig,
) -> Result<Vec<MatchResult>> {
    let source_dvs = defining_vectors(source, cfg)?;
    let target_dvs = defining_vectors(target, cfg)?;
    match_networks(&source_dvs, &target_dvs, cfg.threshold_distance, cfg.unique)
}
