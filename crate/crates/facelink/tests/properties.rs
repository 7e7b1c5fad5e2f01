//! Randomized invariants over the core operations.

use proptest::prelude::*;

use facelink::clustering::cluster_single_linkage;
use facelink::embedding::{l2_distance, mean_vector, EmbeddingVector, FaceRecord};
use facelink::filtering::filter_quality;
use facelink::names::{levenshtein, normalize_name, TranslitTable};

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0..10.0f64, dim)
}

fn record(values: Vec<f64>, pixel_count: u64) -> FaceRecord {
    FaceRecord {
        profile_id: "p".into(),
        photo_id: "ph".into(),
        embedding: EmbeddingVector::new(values).unwrap(),
        pixel_count,
        is_avatar: false,
    }
}

proptest! {
    #[test]
    fn distance_is_a_metric(a in vec_strategy(6), b in vec_strategy(6), c in vec_strategy(6)) {
        let (a, b, c) = (
            EmbeddingVector::new(a).unwrap(),
            EmbeddingVector::new(b).unwrap(),
            EmbeddingVector::new(c).unwrap(),
        );
        let ab = l2_distance(&a, &b).unwrap();
        let ba = l2_distance(&b, &a).unwrap();
        let bc = l2_distance(&b, &c).unwrap();
        let ac = l2_distance(&a, &c).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn mean_stays_inside_the_bounding_box(vs in proptest::collection::vec(vec_strategy(4), 1..12)) {
        let embeddings: Vec<EmbeddingVector> = vs
            .into_iter()
            .map(|v| EmbeddingVector::new(v).unwrap())
            .collect();
        let m = mean_vector(embeddings.iter()).unwrap();
        for axis in 0..4 {
            let lo = embeddings.iter().map(|e| e.values()[axis]).fold(f64::INFINITY, f64::min);
            let hi = embeddings.iter().map(|e| e.values()[axis]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m.values()[axis] >= lo - 1e-9 && m.values()[axis] <= hi + 1e-9);
        }
    }

    #[test]
    fn quality_filter_is_monotone_in_q(
        pixels in proptest::collection::vec(0u64..100_000, 0..40),
        q1 in 0u64..300,
        q2 in 0u64..300,
    ) {
        let (q_low, q_high) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let records: Vec<FaceRecord> = pixels.into_iter().map(|p| record(vec![0.0], p)).collect();
        let loose = filter_quality(&records, q_low);
        let strict = filter_quality(&records, q_high);
        prop_assert!(strict.len() <= loose.len());
        for r in &strict {
            prop_assert!(loose.contains(r));
        }
    }

    #[test]
    fn cluster_count_is_monotone_in_threshold(
        points in proptest::collection::vec(vec_strategy(3), 0..10),
        t1 in 0.1..3.0f64,
        t2 in 0.1..3.0f64,
    ) {
        let (t_low, t_high) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let records: Vec<FaceRecord> = points.into_iter().map(|v| record(v, 0)).collect();
        let loose = cluster_single_linkage(&records, t_high).unwrap();
        let strict = cluster_single_linkage(&records, t_low).unwrap();
        prop_assert!(loose.count() <= strict.count());
    }

    #[test]
    fn levenshtein_bounds_and_normalization_idempotence(a in ".{0,20}", b in ".{0,20}") {
        let table = TranslitTable::default();
        let na = normalize_name(&a, &table, false);
        let nb = normalize_name(&b, &table, false);
        prop_assert_eq!(normalize_name(na.as_str(), &table, false), na.clone());
        let d = levenshtein(&na, &nb);
        prop_assert_eq!(d, levenshtein(&nb, &na));
        prop_assert!(d <= na.len().max(nb.len()));
        prop_assert!(d >= na.len().abs_diff(nb.len()));
        prop_assert_eq!(d == 0, na == nb);
    }
}
