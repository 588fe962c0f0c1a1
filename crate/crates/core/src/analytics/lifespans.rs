use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::fmt_f64;

/// The `k` largest lifespans of one diagram, sorted descending and zero padded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanFeatures {
    pub subject_id: String,
    pub network: String,
    pub dimension: usize,
    pub lifespans: Vec<f64>,
}

/// Lifespans `death - birth`, with infinite deaths replaced by `cap`, sorted
/// descending and truncated or zero padded to length `k`.
pub fn top_k_lifespans(diagram: &PersistenceDiagram, k: usize, cap: f64) -> Vec<f64> {
    let mut spans: Vec<f64> = diagram
        .pairs
        .iter()
        .map(|p| {
            let death = if p.is_essential() { cap } else { p.death };
            (death - p.birth).max(0.0)
        })
        .collect();
    spans.sort_by(|a, b| b.total_cmp(a));
    spans.resize(k, 0.0);
    spans
}

impl LifespanFeatures {
    pub fn from_diagram(
        subject_id: impl Into<String>,
        network: impl Into<String>,
        diagram: &PersistenceDiagram,
        k: usize,
        cap: f64,
    ) -> Self {
        Self {
            subject_id: subject_id.into(),
            network: network.into(),
            dimension: diagram.dimension,
            lifespans: top_k_lifespans(diagram, k, cap),
        }
    }
}

/// `subject_id,l1,...,lk` rows, one per subject.
pub fn lifespans_to_csv(features: &[LifespanFeatures]) -> String {
    let k = features.first().map_or(0, |f| f.lifespans.len());
    let mut out = String::from("subject_id");
    for i in 1..=k {
        out.push_str(&format!(",l{i}"));
    }
    out.push('\n');
    for f in features {
        out.push_str(&f.subject_id);
        for v in &f.lifespans {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::PersistencePair;

    #[test]
    fn capped_and_sorted() {
        let d = PersistenceDiagram::new(
            0,
            vec![
                PersistencePair::new(0.0, 3.0),
                PersistencePair::new(1.0, 2.0),
                PersistencePair::essential(0.0),
            ],
        );
        assert_eq!(top_k_lifespans(&d, 3, 5.0), vec![5.0, 3.0, 1.0]);
    }

    #[test]
    fn empty_pads_with_zeros() {
        assert_eq!(top_k_lifespans(&PersistenceDiagram::empty(1), 10, 1.0), vec![0.0; 10]);
    }

    #[test]
    fn twelve_pairs_keep_ten_largest() {
        let pairs: Vec<_> = (0..12).map(|i| PersistencePair::new(0.0, ((i * 7) % 12) as f64 + 0.5)).collect();
        let d = PersistenceDiagram::new(1, pairs.clone());
        let mut all: Vec<f64> = pairs.iter().map(|p| p.lifespan()).collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(top_k_lifespans(&d, 10, 1.0), all[..10].to_vec());
    }

    #[test]
    fn csv_layout() {
        let f = LifespanFeatures {
            subject_id: "s1".into(),
            network: "DMN".into(),
            dimension: 1,
            lifespans: vec![0.5, 0.0],
        };
        assert_eq!(lifespans_to_csv(&[f]), "subject_id,l1,l2\ns1,0.5,0.0\n");
    }
}
