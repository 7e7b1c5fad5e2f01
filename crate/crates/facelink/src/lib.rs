//! facelink: cross-network profile matching from face embeddings.
//!
//! Profiles from two networks are linked by clustering each profile's face
//! embeddings to find the owner, averaging the owner's faces into a
//! defining vector, and matching defining vectors by nearest Euclidean
//! distance under a threshold. The crate also ships a real-name
//! Levenshtein baseline, an evaluation harness (precision/recall/F1, photo
//! sampling, alignment reduction, quality/threshold grids), and a seeded
//! synthetic dataset generator.

pub mod clustering;
pub mod embedding;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod ingest;
pub mod matching;
pub mod names;
pub mod owner;
pub mod pipeline;
pub mod synthgen;

pub use embedding::{DefiningVector, EmbeddingVector, FaceRecord};
pub use error::{Error, Result};
pub use evaluation::MetricsReport;
pub use ingest::{GroundTruth, ProfileCollection};
pub use matching::{Decision, MatchResult, NoPairReason};
pub use pipeline::PipelineConfig;
