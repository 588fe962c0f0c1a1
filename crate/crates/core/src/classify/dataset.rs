use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{DistanceMatrix, LifespanFeatures};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Lifespans,
    FlattenedWdRoi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub subject_id: String,
    pub features: Vec<f64>,
    pub label: usize,
}

/// Labeled feature vectors. Class indices follow the sorted class names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub items: Vec<Item>,
    pub class_names: Vec<String>,
    pub feature_kind: FeatureKind,
}

impl Dataset {
    /// Build from `(subject, features)` rows and a subject → class-name map.
    pub fn from_rows(
        rows: Vec<(String, Vec<f64>)>,
        labels: &BTreeMap<String, String>,
        feature_kind: FeatureKind,
    ) -> Result<Self> {
        let mut names = BTreeSet::new();
        for (s, _) in &rows {
            let label = labels
                .get(s)
                .ok_or_else(|| Error::InvalidArgument(format!("no label for subject {s:?}")))?;
            names.insert(label.clone());
        }
        let class_names: Vec<String> = names.into_iter().collect();
        let items = rows
            .into_iter()
            .map(|(subject_id, features)| {
                let label = class_names.iter().position(|c| c == &labels[&subject_id]).unwrap();
                Item {
                    subject_id,
                    features,
                    label,
                }
            })
            .collect();
        let ds = Self {
            items,
            class_names,
            feature_kind,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn dim(&self) -> usize {
        self.items.first().map_or(0, |i| i.features.len())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for it in &self.items {
            counts[it.label] += 1;
        }
        counts
    }

    /// Same-length finite vectors; at least two classes with two items each.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for it in &self.items {
            if it.features.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "subject {:?} has {} features, expected {d}",
                    it.subject_id,
                    it.features.len()
                )));
            }
            if it.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite feature for {:?}", it.subject_id)));
            }
        }
        let counts = self.class_counts();
        if counts.len() < 2 || counts.iter().any(|&c| c < 2) {
            return Err(Error::InsufficientData(format!(
                "need at least 2 classes with 2 items each, got counts {counts:?}"
            )));
        }
        Ok(())
    }

    /// Copy restricted to the given item indices.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            class_names: self.class_names.clone(),
            feature_kind: self.feature_kind,
        }
    }
}

/// One vector of `k` lifespans per subject, for a single network and dimension.
pub fn make_dataset_lifespans(
    features: &[LifespanFeatures],
    labels: &BTreeMap<String, String>,
) -> Result<Dataset> {
    let first = features
        .first()
        .ok_or_else(|| Error::InsufficientData("no lifespan features".into()))?;
    for f in features {
        if f.lifespans.len() != first.lifespans.len() {
            return Err(Error::ShapeMismatch(format!(
                "subject {:?} has {} lifespans, expected {}",
                f.subject_id,
                f.lifespans.len(),
                first.lifespans.len()
            )));
        }
        if f.network != first.network || f.dimension != first.dimension {
            return Err(Error::InvalidArgument(format!(
                "features mix {}/H{} with {}/H{}",
                first.network, first.dimension, f.network, f.dimension
            )));
        }
    }
    let rows = features
        .iter()
        .map(|f| (f.subject_id.clone(), f.lifespans.clone()))
        .collect();
    Dataset::from_rows(rows, labels, FeatureKind::Lifespans)
}

/// Upper-triangle flattening of each subject's inter-ROI matrix.
pub fn make_dataset_wd(
    matrices: &[(String, DistanceMatrix)],
    labels: &BTreeMap<String, String>,
) -> Result<Dataset> {
    let (_, first) = matrices
        .first()
        .ok_or_else(|| Error::InsufficientData("no distance matrices".into()))?;
    for (s, m) in matrices {
        if m.labels != first.labels {
            return Err(Error::ShapeMismatch(format!("matrix of {s:?} has different ROI labels")));
        }
        let same_meta = m.meta.kind == first.meta.kind
            && m.meta.dimension == first.meta.dimension
            && m.meta.network == first.meta.network
            && m.meta.filtration == first.meta.filtration
            && m.meta.params == first.meta.params;
        if !same_meta {
            return Err(Error::InvalidArgument(format!("matrix of {s:?} has different metadata")));
        }
    }
    let rows = matrices
        .iter()
        .map(|(s, m)| (s.clone(), m.upper_triangle()))
        .collect();
    Dataset::from_rows(rows, labels, FeatureKind::FlattenedWdRoi)
}

/// Read a `subject_id,f1,...,fk` table, as written for lifespan features.
pub fn read_feature_table(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e))?;
    let header = reader.headers().map_err(|e| Error::format(path, e))?.clone();
    if header.get(0) != Some("subject_id") {
        return Err(Error::format(path, "first column must be subject_id"));
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        let mut features = Vec::with_capacity(record.len().saturating_sub(1));
        for (c, cell) in record.iter().enumerate().skip(1) {
            features.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: r + 2,
                column: header.get(c).unwrap_or("").to_string(),
                value: cell.to_string(),
            })?);
        }
        rows.push((record[0].to_string(), features));
    }
    Ok(rows)
}

/// Rebuild a symmetric zero-diagonal `n * n` matrix from its strict upper triangle.
pub fn unflatten_upper(values: &[f64], n: usize) -> Result<Vec<f64>> {
    if values.len() != n * n.saturating_sub(1) / 2 {
        return Err(Error::ShapeMismatch(format!("{} values cannot fill a {n}x{n} upper triangle", values.len())));
    }
    let mut out = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            out[i * n + j] = values[k];
            out[j * n + i] = values[k];
            k += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{FiltrationKind, MatrixKind, MatrixMeta};
    use crate::distances::WassersteinParams;

    fn labels(n: usize) -> BTreeMap<String, String> {
        (0..n).map(|i| (format!("s{i}"), if i % 2 == 0 { "HC" } else { "MCI" }.to_string())).collect()
    }

    fn lifespans(s: &str, k: usize) -> LifespanFeatures {
        LifespanFeatures {
            subject_id: s.into(),
            network: "DMN".into(),
            dimension: 1,
            lifespans: vec![0.5; k],
        }
    }

    #[test]
    fn lifespan_dataset_shape() {
        let f: Vec<_> = (0..4).map(|i| lifespans(&format!("s{i}"), 10)).collect();
        let ds = make_dataset_lifespans(&f, &labels(4)).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.dim(), 10);
        assert_eq!(ds.class_names, vec!["HC", "MCI"]);
    }

    #[test]
    fn mixed_k_rejected() {
        let mut f: Vec<_> = (0..4).map(|i| lifespans(&format!("s{i}"), 10)).collect();
        f[2].lifespans.pop();
        assert!(make_dataset_lifespans(&f, &labels(4)).is_err());
    }

    #[test]
    fn missing_label_rejected() {
        let f: Vec<_> = (0..4).map(|i| lifespans(&format!("s{i}"), 3)).collect();
        assert!(make_dataset_lifespans(&f, &labels(3)).is_err());
    }

    fn zero_matrix(n: usize) -> DistanceMatrix {
        DistanceMatrix {
            labels: (0..n).map(|i| format!("r{i}")).collect(),
            values: vec![0.0; n * n],
            meta: MatrixMeta {
                kind: MatrixKind::InterRoi,
                dimension: 1,
                network: Some("DMN".into()),
                subject: None,
                filtration: FiltrationKind::Rips,
                params: WassersteinParams::default(),
            },
        }
    }

    #[test]
    fn wd_dataset_flattens_upper_triangle() {
        let ms: Vec<_> = (0..4).map(|i| (format!("s{i}"), zero_matrix(34))).collect();
        let ds = make_dataset_wd(&ms, &labels(4)).unwrap();
        assert_eq!(ds.dim(), 561);
        assert!(ds.items.iter().all(|it| it.features.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn wd_shape_mismatch() {
        let mut ms: Vec<_> = (0..4).map(|i| (format!("s{i}"), zero_matrix(5))).collect();
        ms[1].1 = zero_matrix(4);
        assert!(make_dataset_wd(&ms, &labels(4)).is_err());
        let mut ms: Vec<_> = (0..4).map(|i| (format!("s{i}"), zero_matrix(5))).collect();
        ms[3].1.meta.dimension = 0;
        assert!(make_dataset_wd(&ms, &labels(4)).is_err());
    }

    #[test]
    fn flatten_round_trip() {
        let n = 5;
        let upper: Vec<f64> = (0..10).map(|v| v as f64 + 0.25).collect();
        let full = unflatten_upper(&upper, n).unwrap();
        let mut back = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                back.push(full[i * n + j]);
            }
        }
        assert_eq!(back, upper);
        assert!(unflatten_upper(&upper, 4).is_err());
    }
}
