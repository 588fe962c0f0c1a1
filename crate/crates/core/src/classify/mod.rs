//! Subject-level classification on topological features.

mod dataset;
mod knn;
mod logistic;
mod split;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dataset::{
    make_dataset_lifespans, make_dataset_wd, read_feature_table, unflatten_upper, Dataset,
    FeatureKind, Item,
};
pub use knn::knn_classify;
pub use logistic::{logistic_objective, LogisticModel};
pub use split::{holdout_80_20, stratified_kfold, Split};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelKind {
    Knn { k: usize },
    Logistic { l2: f64, max_iter: usize },
}

impl ModelKind {
    pub fn knn() -> Self {
        ModelKind::Knn { k: 5 }
    }

    pub fn logistic() -> Self {
        ModelKind::Logistic { l2: 1.0, max_iter: 500 }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Self::knn()),
            "logistic" => Ok(Self::logistic()),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}, expected knn or logistic"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    /// Keep only this many features, ranked on the training fold by the largest
    /// absolute difference between class means.
    pub select_top: Option<usize>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, select_top: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    Holdout80_20,
    KFold { folds: usize },
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::Holdout80_20 => write!(f, "holdout_80_20"),
            Protocol::KFold { folds } => write!(f, "kfold_{folds}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(flatten)]
    pub protocol: Protocol,
    pub train_fraction: f64,
    pub seed: u64,
    pub test_subjects: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub class_names: Vec<String>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub per_fold: Vec<f64>,
    pub model: ModelSpec,
    pub split: SplitSpec,
    pub seed: u64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Feature indices ordered by decreasing max pairwise class-mean gap, ties by index.
pub fn rank_features(train: &Dataset) -> Vec<usize> {
    let c = train.n_classes();
    let d = train.dim();
    let counts = train.class_counts();
    let mut means = vec![vec![0.0; d]; c];
    for it in &train.items {
        for (m, v) in means[it.label].iter_mut().zip(&it.features) {
            *m += v / counts[it.label] as f64;
        }
    }
    let gap: Vec<f64> = (0..d)
        .map(|j| {
            let vals: Vec<f64> = (0..c).filter(|&k| counts[k] > 0).map(|k| means[k][j]).collect();
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect();
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| gap[b].total_cmp(&gap[a]).then(a.cmp(&b)));
    idx
}

fn project(ds: &Dataset, keep: &[usize]) -> Dataset {
    let mut out = ds.clone();
    for it in out.items.iter_mut() {
        it.features = keep.iter().map(|&j| it.features[j]).collect();
    }
    out
}

/// Fit on `train`, predict `test`.
pub fn fit_predict(train: &Dataset, test: &Dataset, model: &ModelSpec) -> Result<Vec<usize>> {
    let (train, test) = match model.select_top {
        Some(m) if m < train.dim() => {
            let mut keep = rank_features(train);
            keep.truncate(m);
            keep.sort_unstable();
            (project(train, &keep), project(test, &keep))
        }
        _ => (train.clone(), test.clone()),
    };
    let queries: Vec<Vec<f64>> = test.items.iter().map(|it| it.features.clone()).collect();
    match model.kind {
        ModelKind::Knn { k } => knn_classify(&train, &queries, k),
        ModelKind::Logistic { l2, max_iter } => {
            let m = LogisticModel::fit(&train, l2, max_iter)?;
            queries.iter().map(|q| m.predict(q)).collect()
        }
    }
}

/// Run the protocol. Folds are fitted in parallel and merged in fold order.
pub fn evaluate(ds: &Dataset, protocol: Protocol, model: &ModelSpec, seed: u64) -> Result<EvalReport> {
    ds.validate()?;
    let splits = match protocol {
        Protocol::Holdout80_20 => vec![holdout_80_20(ds, seed)?],
        Protocol::KFold { folds } => stratified_kfold(ds, folds, seed)?,
    };
    let predictions: Vec<Vec<usize>> = splits
        .par_iter()
        .map(|s| fit_predict(&ds.subset(&s.train), &ds.subset(&s.test), model))
        .collect::<Result<_>>()?;
    let c = ds.n_classes();
    let mut confusion = vec![vec![0usize; c]; c];
    let mut per_fold = Vec::with_capacity(splits.len());
    for (s, pred) in splits.iter().zip(&predictions) {
        let mut correct = 0;
        for (&i, &p) in s.test.iter().zip(pred) {
            let truth = ds.items[i].label;
            confusion[truth][p] += 1;
            correct += usize::from(truth == p);
        }
        per_fold.push(correct as f64 / s.test.len() as f64);
    }
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..c).map(|k| confusion[k][k]).sum();
    let test_subjects = splits
        .iter()
        .map(|s| {
            let mut ids: Vec<String> = s.test.iter().map(|&i| ds.items[i].subject_id.clone()).collect();
            ids.dedup();
            ids
        })
        .collect();
    Ok(EvalReport {
        accuracy: correct as f64 / total as f64,
        class_names: ds.class_names.clone(),
        confusion,
        per_fold,
        model: *model,
        split: SplitSpec {
            protocol,
            train_fraction: match protocol {
                Protocol::Holdout80_20 => 0.8,
                Protocol::KFold { folds } => (folds - 1) as f64 / folds as f64,
            },
            seed,
            test_subjects,
        },
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n: usize) -> Dataset {
        let mut items = Vec::new();
        for c in 0..2 {
            for i in 0..n {
                let jitter = (i as f64 * 0.37).sin() * 0.3;
                items.push(Item {
                    subject_id: format!("{c}_{i:02}"),
                    features: vec![c as f64 * 4.0 + jitter, jitter * 2.0, (i % 3) as f64],
                    label: c,
                });
            }
        }
        Dataset {
            items,
            class_names: vec!["A".into(), "B".into()],
            feature_kind: FeatureKind::Lifespans,
        }
    }

    #[test]
    fn separable_blobs_are_learned() {
        let ds = blobs(10);
        for kind in [ModelKind::knn(), ModelKind::logistic()] {
            let r = evaluate(&ds, Protocol::KFold { folds: 5 }, &ModelSpec::new(kind), 4).unwrap();
            assert_eq!(r.accuracy, 1.0);
            assert_eq!(r.per_fold.len(), 5);
            assert_eq!(r.confusion, vec![vec![10, 0], vec![0, 10]]);
        }
    }

    #[test]
    fn feature_ranking_picks_informative_column() {
        assert_eq!(rank_features(&blobs(10))[0], 0);
        let spec = ModelSpec {
            kind: ModelKind::knn(),
            select_top: Some(1),
        };
        let r = evaluate(&blobs(10), Protocol::Holdout80_20, &spec, 0).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn report_is_deterministic() {
        let ds = blobs(10);
        let spec = ModelSpec::new(ModelKind::logistic());
        let a = evaluate(&ds, Protocol::KFold { folds: 5 }, &spec, 11).unwrap();
        let b = evaluate(&ds, Protocol::KFold { folds: 5 }, &spec, 11).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn model_parsing() {
        assert_eq!("knn".parse::<ModelKind>().unwrap(), ModelKind::knn());
        assert!("svm".parse::<ModelKind>().is_err());
    }
}
