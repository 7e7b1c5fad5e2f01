//! Real-name matching baseline: normalization, Levenshtein distance, and
//! per-source nearest-name matching.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matching::{Decision, MatchResult, NoPairReason};

/// Cyrillic-to-Latin mapping. The default table is GOST 7.79-2000 System B
/// without diacritics, shipped with the crate.
#[derive(Debug, Clone)]
pub struct TranslitTable {
    map: HashMap<char, String>,
}

const DEFAULT_TABLE: &str = include_str!("../data/translit_gost779b.tsv");

impl Default for TranslitTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled table is valid")
    }
}

impl TranslitTable {
    fn parse(content: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for line in content.lines() {
            if line.is_empty() {
                continue;
            }
            let (from, to) = line.split_once('\t').unwrap_or((line, ""));
            let mut chars = from.chars();
            let c = chars.next().ok_or_else(|| {
                Error::InvalidConfig("empty left side in transliteration table".into())
            })?;
            if chars.next().is_some() {
                return Err(Error::InvalidConfig(format!(
                    "transliteration source {from:?} must be a single character"
                )));
            }
            map.insert(c, to.to_string());
        }
        Ok(TranslitTable { map })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut content = String::new();
        for line in std::io::BufReader::new(file).lines() {
            content.push_str(&line.map_err(|e| Error::io(path, e))?);
            content.push('\n');
        }
        Self::parse(&content)
    }
}

/// A name reduced to lowercase Latin letters and single internal spaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormalizedName(String);

impl NormalizedName {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.chars().count()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Normalization sequence: lowercase; drop everything that is neither a
/// letter nor a space; collapse whitespace runs and trim; transliterate
/// Cyrillic to Latin; drop remaining non-Latin letters. With `strip_spaces`
/// the space separator is removed as well.
pub fn normalize_name(raw: &str, table: &TranslitTable, strip_spaces: bool) -> NormalizedName {
    let lowered = raw.to_lowercase();
    let mut kept = String::with_capacity(lowered.len());
    for c in lowered.chars() {
        if c.is_alphabetic() {
            kept.push(c);
        } else if c.is_whitespace() {
            kept.push(' ');
        }
    }
    let mut out = String::with_capacity(kept.len());
    let mut buf = [0u8; 4];
    let mut pending_space = false;
    for c in kept.chars() {
        if c == ' ' {
            pending_space = !out.is_empty();
            continue;
        }
        let piece: &str = if c.is_ascii_lowercase() {
            c.encode_utf8(&mut buf)
        } else {
            match table.map.get(&c) {
                Some(s) => s,
                None => continue, // non-Cyrillic non-Latin letter
            }
        };
        if piece.is_empty() {
            // hard/soft sign: consumed, contributes nothing
            continue;
        }
        if pending_space && !strip_spaces {
            out.push(' ');
        }
        pending_space = false;
        out.push_str(piece);
    }
    NormalizedName(out)
}

/// Unit-cost edit distance over characters, two-row dynamic programming.
pub fn levenshtein(a: &NormalizedName, b: &NormalizedName) -> usize {
    let a: Vec<char> = a.0.chars().collect();
    let b: Vec<char> = b.0.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Per-source nearest name by edit distance; matched when the smallest
/// distance does not exceed the threshold. Ties break to the smallest
/// target id.
pub fn match_by_name(
    source_names: &BTreeMap<String, NormalizedName>,
    target_names: &BTreeMap<String, NormalizedName>,
    threshold: usize,
) -> Vec<MatchResult> {
    source_names
        .iter()
        .map(|(source_id, name)| {
            let mut best: Option<(usize, &str)> = None;
            for (target_id, tname) in target_names {
                let d = levenshtein(name, tname);
                let better = match best {
                    None => true,
                    Some((bd, bid)) => d < bd || (d == bd && target_id.as_str() < bid),
                };
                if better {
                    best = Some((d, target_id));
                }
            }
            let decision = match best {
                None => Decision::NoPair(NoPairReason::NoCandidate),
                Some((d, id)) if d <= threshold => Decision::Matched {
                    target_profile_id: id.to_string(),
                    distance: d as f64,
                },
                Some(_) => Decision::NoPair(NoPairReason::AboveThreshold),
            };
            MatchResult {
                source_profile_id: source_id.clone(),
                decision,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(raw: &str) -> NormalizedName {
        normalize_name(raw, &TranslitTable::default(), false)
    }

    #[test]
    fn lowercase_only() {
        assert_eq!(norm("ANNA").as_str(), "anna");
    }

    #[test]
    fn drops_punctuation_and_digits() {
        assert_eq!(norm("John_Smith99").as_str(), "johnsmith");
    }

    #[test]
    fn transliterates_cyrillic() {
        assert_eq!(norm("Иван Петров").as_str(), "ivan petrov");
        assert_eq!(norm("Щукин").as_str(), "shchukin");
        assert_eq!(norm("Объём").as_str(), "obyom");
    }

    #[test]
    fn collapses_and_trims_spaces() {
        assert_eq!(norm("  anna    maria  ").as_str(), "anna maria");
    }

    #[test]
    fn strip_spaces_flag() {
        let n = normalize_name("Anna Maria", &TranslitTable::default(), true);
        assert_eq!(n.as_str(), "annamaria");
    }

    #[test]
    fn drops_other_scripts() {
        assert_eq!(norm("李 anna").as_str(), "anna");
    }

    #[test]
    fn empty_result_is_valid() {
        assert_eq!(norm("1234 !!").as_str(), "");
    }

    #[test]
    fn normalize_is_idempotent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let table = TranslitTable::default();
        for _ in 0..300 {
            let len = rng.gen_range(0..30);
            let raw: String = (0..len)
                .map(|_| char::from_u32(rng.gen_range(1..0x2000)).unwrap_or(' '))
                .collect();
            let once = normalize_name(&raw, &table, false);
            let twice = normalize_name(once.as_str(), &table, false);
            assert_eq!(once, twice, "raw={raw:?}");
        }
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein(&norm("abc"), &norm("abc")), 0);
        assert_eq!(levenshtein(&norm(""), &norm("abc")), 3);
        assert_eq!(levenshtein(&norm("kitten"), &norm("sitting")), 3);
    }

    /// Full-matrix DP oracle, kept independent of the two-row version.
    pub(crate) fn levenshtein_matrix_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            m[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                m[i][j] = (m[i - 1][j] + 1)
                    .min(m[i][j - 1] + 1)
                    .min(m[i - 1][j - 1] + cost);
            }
        }
        m[a.len()][b.len()]
    }

    #[test]
    fn levenshtein_matches_matrix_oracle_and_bounds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
                let len = rng.gen_range(0..=20);
                (0..len)
                    .map(|_| (b'a' + rng.gen_range(0..4)) as char)
                    .collect()
            };
            let (a, b) = (mk(&mut rng), mk(&mut rng));
            let na = NormalizedName(a.clone());
            let nb = NormalizedName(b.clone());
            let d = levenshtein(&na, &nb);
            assert_eq!(d, levenshtein_matrix_oracle(&a, &b));
            assert_eq!(d, levenshtein(&nb, &na));
            assert!(d <= a.len().max(b.len()));
            assert!(d >= a.len().abs_diff(b.len()));
        }
    }

    #[test]
    fn match_by_name_threshold_and_ties() {
        let mut source = BTreeMap::new();
        source.insert("s1".to_string(), norm("anna"));
        source.insert("s2".to_string(), norm("zzzzzzzzzz"));
        let mut target = BTreeMap::new();
        target.insert("t1".to_string(), norm("anna"));
        target.insert("t2".to_string(), norm("annX"));
        let rs = match_by_name(&source, &target, 4);
        match &rs[0].decision {
            Decision::Matched {
                target_profile_id,
                distance,
            } => {
                assert_eq!(target_profile_id, "t1");
                assert_eq!(*distance, 0.0);
            }
            other => panic!("unexpected: {other:?}"),
        }
        assert_eq!(rs[1].decision, Decision::NoPair(NoPairReason::AboveThreshold));
    }
}
