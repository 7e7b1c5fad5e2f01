//! File ingestion: face-record JSON Lines, tab-separated name files, and
//! tab-separated ground-truth pair files.
//!
//! Face-record files carry a header line `{"dimension": d}` declaring the
//! dataset-wide embedding dimension; every record is validated against it.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::embedding::{EmbeddingVector, FaceRecord};
use crate::error::{Error, Result};

/// All face records and name records for one network, keyed by profile id.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCollection {
    pub network_id: String,
    pub dimension: usize,
    /// Profile id -> face records, in file order.
    pub records: BTreeMap<String, Vec<FaceRecord>>,
    /// Profile id -> raw name. Optional per profile.
    pub names: BTreeMap<String, String>,
}

impl ProfileCollection {
    pub fn new(network_id: impl Into<String>, dimension: usize) -> Self {
        ProfileCollection {
            network_id: network_id.into(),
            dimension,
            records: BTreeMap::new(),
            names: BTreeMap::new(),
        }
    }

    pub fn profile_count(&self) -> usize {
        let mut ids: BTreeSet<&String> = self.records.keys().collect();
        ids.extend(self.names.keys());
        ids.len()
    }

    pub fn face_count(&self) -> usize {
        self.records.values().map(Vec::len).sum()
    }
}

/// Known true cross-network pairs. Each source and each target id appears at
/// most once.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// source profile id -> target profile id
    pub pairs: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn v(&self) -> usize {
        self.pairs.len()
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.pairs.get(source).map(String::as_str) == Some(target)
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map = BTreeMap::new();
        let mut targets = BTreeSet::new();
        for (source, target) in pairs {
            if map.contains_key(&source) {
                return Err(Error::DuplicateGroundTruthId {
                    role: "source",
                    id: source,
                });
            }
            if !targets.insert(target.clone()) {
                return Err(Error::DuplicateGroundTruthId {
                    role: "target",
                    id: target,
                });
            }
            map.insert(source, target);
        }
        Ok(GroundTruth { pairs: map })
    }
}

#[derive(Deserialize)]
struct HeaderLine {
    dimension: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordLine {
    profile_id: String,
    photo_id: String,
    embedding: Vec<f64>,
    pixel_count: u64,
    #[serde(default)]
    is_avatar: bool,
}

/// Loads a face-record file. When `expected_dim` is given, the header's
/// declared dimension must match it; otherwise the header alone decides.
pub fn load_face_records(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
) -> Result<ProfileCollection> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let network_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".to_string());

    let mut lines = reader.lines().enumerate();
    let dimension = match lines.next() {
        None => {
            // Empty file: zero profiles, dimension from the caller or 0.
            return Ok(ProfileCollection::new(network_id, expected_dim.unwrap_or(0)));
        }
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            let header: HeaderLine = serde_json::from_str(&line)
                .map_err(|e| Error::parse(path, 1, format!("invalid header: {e}")))?;
            if let Some(expected) = expected_dim {
                if header.dimension != expected {
                    return Err(Error::parse(
                        path,
                        1,
                        format!(
                            "declared dimension {} does not match expected {}",
                            header.dimension, expected
                        ),
                    ));
                }
            }
            header.dimension
        }
    };

    let mut collection = ProfileCollection::new(network_id, dimension);
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RecordLine = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, line_no, format!("malformed record: {e}")))?;
        if raw.embedding.len() != dimension {
            return Err(Error::parse(
                path,
                line_no,
                format!(
                    "embedding length {} does not match dimension {}",
                    raw.embedding.len(),
                    dimension
                ),
            ));
        }
        if raw.profile_id.is_empty() || raw.photo_id.is_empty() {
            return Err(Error::parse(path, line_no, "empty profile_id or photo_id"));
        }
        let embedding = EmbeddingVector::new(raw.embedding)
            .map_err(|_| Error::parse(path, line_no, "non-finite embedding value"))?;
        collection
            .records
            .entry(raw.profile_id.clone())
            .or_default()
            .push(FaceRecord {
                profile_id: raw.profile_id,
                photo_id: raw.photo_id,
                embedding,
                pixel_count: raw.pixel_count,
                is_avatar: raw.is_avatar,
            });
    }
    Ok(collection)
}

/// Writes a collection's face records in the JSON Lines format, header first.
pub fn write_face_records(collection: &ProfileCollection, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{{\"dimension\": {}}}", collection.dimension).map_err(io)?;
    for records in collection.records.values() {
        for r in records {
            let line = serde_json::json!({
                "profile_id": r.profile_id,
                "photo_id": r.photo_id,
                "embedding": r.embedding.values(),
                "pixel_count": r.pixel_count,
                "is_avatar": r.is_avatar,
            });
            writeln!(w, "{line}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Loads a tab-separated name file into the collection.
pub fn load_names(collection: &mut ProfileCollection, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (id, name) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected profile_id<TAB>name"))?;
        if id.is_empty() {
            return Err(Error::parse(path, idx + 1, "empty profile_id"));
        }
        collection.names.insert(id.to_string(), name.to_string());
    }
    Ok(())
}

/// Writes the collection's names as profile_id<TAB>name lines.
pub fn write_names(collection: &ProfileCollection, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (id, name) in &collection.names {
        writeln!(w, "{id}\t{name}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads a two-column tab-separated ground-truth file.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let (source, target) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, idx + 1, "expected source<TAB>target"))?;
        pairs.push((source.to_string(), target.to_string()));
    }
    GroundTruth::from_pairs(pairs)
}

/// Writes ground truth as source<TAB>target lines.
pub fn write_ground_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (source, target) in &truth.pairs {
        writeln!(w, "{source}\t{target}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_two_records_for_one_profile() {
        let f = write_tmp(concat!(
            "{\"dimension\": 2}\n",
            "{\"profile_id\":\"a\",\"photo_id\":\"p1\",\"embedding\":[1.0,2.0],\"pixel_count\":100}\n",
            "{\"profile_id\":\"a\",\"photo_id\":\"p2\",\"embedding\":[3.0,4.0],\"pixel_count\":200,\"is_avatar\":true}\n",
        ));
        let c = load_face_records(f.path(), Some(2)).unwrap();
        assert_eq!(c.records["a"].len(), 2);
        assert!(c.records["a"][1].is_avatar);
        assert!(!c.records["a"][0].is_avatar);
    }

    #[test]
    fn empty_file_gives_zero_profiles() {
        let f = write_tmp("");
        let c = load_face_records(f.path(), Some(512)).unwrap();
        assert_eq!(c.records.len(), 0);
        assert_eq!(c.dimension, 512);
    }

    #[test]
    fn dimension_mismatch_names_line_and_lengths() {
        let short: Vec<String> = vec!["0.0".to_string(); 511];
        let f = write_tmp(&format!(
            "{{\"dimension\": 512}}\n{{\"profile_id\":\"a\",\"photo_id\":\"p\",\"embedding\":[{}],\"pixel_count\":1}}\n",
            short.join(",")
        ));
        let err = load_face_records(f.path(), Some(512)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "{msg}");
        assert!(msg.contains("511") && msg.contains("512"), "{msg}");
    }

    #[test]
    fn non_finite_value_rejected() {
        let f = write_tmp(
            "{\"dimension\": 1}\n{\"profile_id\":\"a\",\"photo_id\":\"p\",\"embedding\":[1e999],\"pixel_count\":1}\n",
        );
        assert!(load_face_records(f.path(), None).is_err());
    }

    #[test]
    fn ground_truth_counts_rows() {
        let f = write_tmp("a\tx\nb\ty\nc\tz\n");
        let t = load_ground_truth(f.path()).unwrap();
        assert_eq!(t.v(), 3);
        assert!(t.contains("a", "x"));
    }

    #[test]
    fn ground_truth_duplicate_source_rejected() {
        let f = write_tmp("a\tx\na\ty\n");
        let err = load_ground_truth(f.path()).unwrap_err();
        assert!(err.to_string().contains("\"a\""), "{err}");
    }

    #[test]
    fn ground_truth_duplicate_target_rejected() {
        let f = write_tmp("a\tx\nb\tx\n");
        assert!(load_ground_truth(f.path()).is_err());
    }

    #[test]
    fn face_records_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let dim = 4;
        let mut c = ProfileCollection::new("net", dim);
        for p in 0..5 {
            let pid = format!("u{p}");
            let recs: Vec<FaceRecord> = (0..rng.gen_range(1..6))
                .map(|i| FaceRecord {
                    profile_id: pid.clone(),
                    photo_id: format!("ph{i}"),
                    embedding: EmbeddingVector::new(
                        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    )
                    .unwrap(),
                    pixel_count: rng.gen_range(0..10_000),
                    is_avatar: rng.gen_bool(0.2),
                })
                .collect();
            c.records.insert(pid, recs);
        }
        let f = tempfile::NamedTempFile::new().unwrap();
        write_face_records(&c, f.path()).unwrap();
        let loaded = load_face_records(f.path(), Some(dim)).unwrap();
        assert_eq!(loaded.records, c.records);
        assert_eq!(loaded.dimension, c.dimension);
    }

    #[test]
    fn loading_is_line_order_insensitive() {
        let body = [
            "{\"profile_id\":\"a\",\"photo_id\":\"p1\",\"embedding\":[1.0],\"pixel_count\":1}",
            "{\"profile_id\":\"b\",\"photo_id\":\"p2\",\"embedding\":[2.0],\"pixel_count\":2}",
        ];
        let f1 = write_tmp(&format!("{{\"dimension\":1}}\n{}\n{}\n", body[0], body[1]));
        let f2 = write_tmp(&format!("{{\"dimension\":1}}\n{}\n{}\n", body[1], body[0]));
        let c1 = load_face_records(f1.path(), None).unwrap();
        let c2 = load_face_records(f2.path(), None).unwrap();
        assert_eq!(c1.records, c2.records);
    }

    #[test]
    fn names_load_and_attach() {
        let f = write_tmp("a\tAnna Ivanova\nb\tBoris\n");
        let mut c = ProfileCollection::new("net", 2);
        load_names(&mut c, f.path()).unwrap();
        assert_eq!(c.names["a"], "Anna Ivanova");
        assert_eq!(c.profile_count(), 2);
    }
}
