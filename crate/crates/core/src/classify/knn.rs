use std::cmp::Ordering;

use super::Dataset;
use crate::error::{Error, Result};

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Predict one class per query by majority vote among the `k` nearest
/// training items (Euclidean). Neighbours at equal distance are ordered by
/// class and then by feature vector, so the result does not depend on the
/// order of the training items. Vote ties go to the class with the smaller
/// mean neighbour distance, then to the lower class index.
pub fn knn_classify(train: &Dataset, queries: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let k = k.min(train.len());
    let n_classes = train.n_classes();
    queries
        .iter()
        .map(|q| {
            if q.len() != train.dim() {
                return Err(Error::DimensionMismatch(q.len(), train.dim()));
            }
            let mut neigh: Vec<(f64, usize, &[f64])> = train
                .items
                .iter()
                .map(|it| (euclidean(q, &it.features), it.label, it.features.as_slice()))
                .collect();
            neigh.sort_by(|a, b| {
                a.0.total_cmp(&b.0)
                    .then(a.1.cmp(&b.1))
                    .then_with(|| lex_cmp(a.2, b.2))
            });
            let mut votes = vec![0usize; n_classes];
            let mut dist = vec![0.0; n_classes];
            for &(d, c, _) in &neigh[..k] {
                votes[c] += 1;
                dist[c] += d;
            }
            let best = (0..n_classes)
                .filter(|&c| votes[c] > 0)
                .min_by(|&a, &b| {
                    votes[b].cmp(&votes[a]).then_with(|| {
                        (dist[a] / votes[a] as f64).total_cmp(&(dist[b] / votes[b] as f64))
                    })
                })
                .unwrap();
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{FeatureKind, Item};

    fn ds(points: &[(f64, usize)]) -> Dataset {
        Dataset {
            items: points
                .iter()
                .enumerate()
                .map(|(i, &(x, c))| Item {
                    subject_id: format!("s{i}"),
                    features: vec![x],
                    label: c,
                })
                .collect(),
            class_names: vec!["A".into(), "B".into()],
            feature_kind: FeatureKind::Lifespans,
        }
    }

    #[test]
    fn nearest_neighbour() {
        let train = ds(&[(0.0, 0), (1.0, 0), (10.0, 1), (11.0, 1)]);
        let pred = knn_classify(&train, &[vec![0.4], vec![10.6]], 1).unwrap();
        assert_eq!(pred, vec![0, 1]);
    }

    #[test]
    fn vote_tie_uses_mean_distance() {
        let train = ds(&[(-1.0, 0), (0.5, 1)]);
        assert_eq!(knn_classify(&train, &[vec![0.0]], 2).unwrap(), vec![1]);
        let train = ds(&[(-1.0, 0), (1.0, 1)]);
        assert_eq!(knn_classify(&train, &[vec![0.0]], 2).unwrap(), vec![0]);
    }

    #[test]
    fn empty_training_set() {
        let mut train = ds(&[(0.0, 0)]);
        train.items.clear();
        assert!(knn_classify(&train, &[vec![0.0]], 1).is_err());
    }
}
