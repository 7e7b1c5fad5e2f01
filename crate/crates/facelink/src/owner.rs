//! Owner identification: decide which clusters hold the profile owner's
//! faces and average them into the defining vector.

use crate::clustering::ClusterSet;
use crate::embedding::{mean_vector, DefiningVector, FaceRecord};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnerConfig {
    /// How many of the largest clusters feed the defining vector.
    pub k_clusters: usize,
    /// Minimum size of the largest cluster; below it the profile has no owner.
    pub min_cluster_size: usize,
    /// Build the defining vector from avatar faces only, skipping clustering.
    pub avatars_only: bool,
}

impl Default for OwnerConfig {
    fn default() -> Self {
        OwnerConfig {
            k_clusters: 2,
            min_cluster_size: 2,
            avatars_only: false,
        }
    }
}

/// Builds the defining vector for one profile from its cluster partition.
///
/// Rules, in order:
/// - no clusters: no owner
/// - a single cluster: average every face of the profile
/// - all clusters are singletons: no owner (cannot tell who the owner is)
/// - largest cluster below `min_cluster_size`: no owner
/// - otherwise: flat average over the union of the `k_clusters` largest
///   clusters (every face weighs equally)
pub fn identify_owner(
    records: &[FaceRecord],
    clusters: &ClusterSet,
    cfg: &OwnerConfig,
) -> Result<DefiningVector> {
    let profile_id = records
        .first()
        .map(|r| r.profile_id.clone())
        .unwrap_or_default();
    if clusters.count() == 0 {
        return Ok(DefiningVector::no_owner(profile_id));
    }
    if clusters.count() == 1 {
        let vector = mean_vector(records.iter().map(|r| &r.embedding))?;
        return Ok(DefiningVector {
            profile_id,
            vector: Some(vector),
            support_count: records.len(),
        });
    }
    if clusters.clusters.iter().all(|c| c.len() == 1) {
        return Ok(DefiningVector::no_owner(profile_id));
    }
    if clusters.clusters[0].len() < cfg.min_cluster_size {
        return Ok(DefiningVector::no_owner(profile_id));
    }
    let take = cfg.k_clusters.min(clusters.count());
    let members: Vec<usize> = clusters.clusters[..take]
        .iter()
        .flat_map(|c| c.iter().copied())
        .collect();
    let vector = mean_vector(members.iter().map(|&i| &records[i].embedding))?;
    Ok(DefiningVector {
        profile_id,
        vector: Some(vector),
        support_count: members.len(),
    })
}

/// Avatars-only mode: the defining vector is the mean of avatar-flagged
/// faces, with no owner-detection stage.
pub fn avatar_defining_vector(records: &[FaceRecord]) -> Result<DefiningVector> {
    let profile_id = records
        .first()
        .map(|r| r.profile_id.clone())
        .unwrap_or_default();
    let avatars: Vec<&FaceRecord> = records.iter().filter(|r| r.is_avatar).collect();
    if avatars.is_empty() {
        return Ok(DefiningVector::no_owner(profile_id));
    }
    let vector = mean_vector(avatars.iter().map(|r| &r.embedding))?;
    Ok(DefiningVector {
        profile_id,
        vector: Some(vector),
        support_count: avatars.len(),
    })
}
