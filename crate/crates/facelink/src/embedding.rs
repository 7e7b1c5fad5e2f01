//! Domain types and exact vector arithmetic shared by the whole pipeline.
//!
//! Embeddings are kept in the embedder's native scale; distance thresholds
//! elsewhere in the pipeline are absolute, so no re-normalization happens
//! here. Only finiteness is validated on construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-dimension real vector produced by a face embedder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// Validates finiteness; the dataset-wide dimension is checked by callers.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One detected face: which profile and photo it came from, its embedding,
/// and the size of the face crop in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub profile_id: String,
    pub photo_id: String,
    pub embedding: EmbeddingVector,
    pub pixel_count: u64,
    #[serde(default)]
    pub is_avatar: bool,
}

/// Per-profile owner representation: the element-wise mean of the selected
/// face embeddings, or an explicit no-owner marker.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningVector {
    pub profile_id: String,
    pub vector: Option<EmbeddingVector>,
    pub support_count: usize,
}

impl DefiningVector {
    pub fn no_owner(profile_id: impl Into<String>) -> Self {
        DefiningVector {
            profile_id: profile_id.into(),
            vector: None,
            support_count: 0,
        }
    }

    pub fn has_owner(&self) -> bool {
        self.vector.is_some()
    }
}

/// Euclidean distance between two embeddings of equal dimension.
pub fn l2_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Element-wise mean of a non-empty set of embeddings.
pub fn mean_vector<'a, I>(vs: I) -> Result<EmbeddingVector>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    let mut iter = vs.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput("mean_vector"))?;
    let mut acc: Vec<f64> = first.values().to_vec();
    let mut n = 1usize;
    for v in iter {
        if v.dim() != acc.len() {
            return Err(Error::DimensionMismatch {
                left: acc.len(),
                right: v.dim(),
            });
        }
        for (a, x) in acc.iter_mut().zip(v.values()) {
            *a += x;
        }
        n += 1;
    }
    let inv = 1.0 / n as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    EmbeddingVector::new(acc)
}
