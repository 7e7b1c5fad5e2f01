//! Record filtering: minimum face-crop quality and anchor-based removal of
//! child faces.
//!
//! The quality parameter `q` is the minimum side length of the face crop;
//! a record passes when `pixel_count >= q*q`. An anchor is a mean embedding
//! standing for a face subspace (children's faces); records within the
//! anchor's radius are removed.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::{l2_distance, mean_vector, EmbeddingVector, FaceRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub label: String,
    pub radius: f64,
    pub vector: EmbeddingVector,
}

/// Builds an anchor as the element-wise mean of the given face embeddings.
pub fn build_anchor<'a, I>(child_faces: I, radius: f64, label: impl Into<String>) -> Result<Anchor>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    if radius <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "anchor radius must be positive, got {radius}"
        )));
    }
    let vector = mean_vector(child_faces).map_err(|e| match e {
        Error::EmptyInput(_) => Error::EmptyInput("build_anchor"),
        other => other,
    })?;
    Ok(Anchor {
        label: label.into(),
        radius,
        vector,
    })
}

/// Keeps exactly the records with `pixel_count >= q*q`, preserving order.
pub fn filter_quality(records: &[FaceRecord], q: u64) -> Vec<FaceRecord> {
    let min_pixels = q * q;
    records
        .iter()
        .filter(|r| r.pixel_count >= min_pixels)
        .cloned()
        .collect()
}

/// Removes every record within (closed-ball) radius of any anchor,
/// preserving order.
pub fn filter_anchor(records: &[FaceRecord], anchors: &[Anchor]) -> Result<Vec<FaceRecord>> {
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        let mut removed = false;
        for a in anchors {
            if l2_distance(&r.embedding, &a.vector)? <= a.radius {
                removed = true;
                break;
            }
        }
        if !removed {
            kept.push(r.clone());
        }
    }
    Ok(kept)
}

/// Loads an anchor from its JSON file format.
pub fn load_anchor(path: impl AsRef<Path>) -> Result<Anchor> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let anchor: Anchor =
        serde_json::from_str(&content).map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if anchor.radius <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "anchor radius must be positive, got {}",
            anchor.radius
        )));
    }
    Ok(anchor)
}

pub fn write_anchor(anchor: &Anchor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, anchor)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
