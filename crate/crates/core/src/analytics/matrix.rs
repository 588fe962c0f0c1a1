use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagram::PersistenceDiagram;
use crate::distances::{wasserstein_distance, WassersteinParams};
use crate::error::{Error, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationKind {
    Rips,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// Rows are the ROIs of one subject.
    InterRoi,
    /// Rows are subjects, for one network.
    InterSubject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub kind: MatrixKind,
    pub dimension: usize,
    pub network: Option<String>,
    pub subject: Option<String>,
    pub filtration: FiltrationKind,
    pub params: WassersteinParams,
}

/// Square matrix of diagram distances with labeled axes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    /// Row-major `n * n` values.
    pub values: Vec<f64>,
    pub meta: MatrixMeta,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    labels: Vec<String>,
    #[serde(flatten)]
    meta: MatrixMeta,
}

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Strict upper triangle, row by row: `n(n-1)/2` values.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect()
    }

    /// Symmetric, zero diagonal, non-negative and finite.
    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        if self.values.len() != n * n {
            return Err(Error::ShapeMismatch(format!("{} values for {n} labels", self.values.len())));
        }
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 || v != self.get(j, i) {
                    return Err(Error::InvalidArgument(format!("invalid entry ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let n = self.size();
        let mut out = self.labels.join(",");
        out.push('\n');
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| fmt_f64(self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&Sidecar {
            labels: self.labels.clone(),
            meta: self.meta.clone(),
        })
        .expect("sidecar serialization cannot fail")
    }

    /// Write `<stem>.csv` and its `<stem>.json` sidecar.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        fs::write(csv_path, self.to_csv_string()).map_err(|e| Error::io(csv_path, e))?;
        let side = csv_path.with_extension("json");
        fs::write(&side, self.sidecar_json()).map_err(|e| Error::io(&side, e))
    }

    /// Read a matrix CSV and its sidecar.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let side = csv_path.with_extension("json");
        let side_text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let sidecar: Sidecar = serde_json::from_str(&side_text).map_err(|e| Error::format(&side, e))?;
        let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let labels: Vec<String> = reader
            .headers()
            .map_err(|e| Error::format(csv_path, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        if labels != sidecar.labels {
            return Err(Error::format(csv_path, "header labels differ from sidecar"));
        }
        let mut values = Vec::with_capacity(labels.len() * labels.len());
        for record in reader.records() {
            let record = record.map_err(|e| Error::format(csv_path, e))?;
            for cell in record.iter() {
                values.push(
                    cell.parse::<f64>()
                        .map_err(|_| Error::format(csv_path, format!("bad number {cell:?}")))?,
                );
            }
        }
        let m = Self {
            labels,
            values,
            meta: sidecar.meta,
        };
        m.validate().map_err(|e| Error::format(csv_path, e))?;
        Ok(m)
    }
}

/// Pairwise distances between labeled diagrams. The upper triangle is
/// computed in parallel and mirrored.
pub fn pairwise_matrix(
    items: &[(String, PersistenceDiagram)],
    params: &WassersteinParams,
    meta: MatrixMeta,
) -> Result<DistanceMatrix> {
    if items.len() < 2 {
        return Err(Error::InsufficientData(format!("{} diagrams, need at least 2", items.len())));
    }
    let dim = items[0].1.dimension;
    if let Some((_, d)) = items.iter().find(|(_, d)| d.dimension != dim) {
        return Err(Error::DimensionMismatch(dim, d.dimension));
    }
    let n = items.len();
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let dists: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| wasserstein_distance(&items[i].1, &items[j].1, params))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n * n];
    for (&(i, j), &d) in cells.iter().zip(&dists) {
        values[i * n + j] = d;
        values[j * n + i] = d;
    }
    let m = DistanceMatrix {
        labels: items.iter().map(|(l, _)| l.clone()).collect(),
        values,
        meta: MatrixMeta {
            dimension: dim,
            params: *params,
            ..meta
        },
    };
    m.validate()?;
    Ok(m)
}

/// Distances between the diagrams of one subject's ROIs.
pub fn inter_roi_matrix(
    rois: &[(String, PersistenceDiagram)],
    params: &WassersteinParams,
) -> Result<DistanceMatrix> {
    pairwise_matrix(
        rois,
        params,
        MatrixMeta {
            kind: MatrixKind::InterRoi,
            dimension: 0,
            network: None,
            subject: None,
            filtration: FiltrationKind::Rips,
            params: *params,
        },
    )
}

/// Distances between subjects' diagrams for one network.
pub fn inter_subject_matrix(
    subjects: &[(String, PersistenceDiagram)],
    params: &WassersteinParams,
) -> Result<DistanceMatrix> {
    pairwise_matrix(
        subjects,
        params,
        MatrixMeta {
            kind: MatrixKind::InterSubject,
            dimension: 0,
            network: None,
            subject: None,
            filtration: FiltrationKind::Graph,
            params: *params,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::PersistencePair;

    fn dgm(pairs: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(1, pairs.iter().map(|&(b, d)| PersistencePair::new(b, d)).collect())
    }

    fn items() -> Vec<(String, PersistenceDiagram)> {
        vec![
            ("r1".into(), dgm(&[(0.0, 1.0)])),
            ("r2".into(), dgm(&[(0.0, 2.0), (0.5, 0.7)])),
            ("r3".into(), dgm(&[])),
        ]
    }

    #[test]
    fn identical_diagrams_give_zero_matrix() {
        let same: Vec<_> = (0..4).map(|i| (format!("r{i}"), dgm(&[(0.1, 0.9)]))).collect();
        let m = inter_roi_matrix(&same, &WassersteinParams::default()).unwrap();
        assert!(m.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn entries_match_pairwise_calls() {
        let params = WassersteinParams::default();
        let items = items();
        let m = inter_roi_matrix(&items, &params).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { wasserstein_distance(&items[i].1, &items[j].1, &params).unwrap() };
                assert_eq!(m.get(i, j), expect);
            }
        }
        assert_eq!(m.upper_triangle().len(), 3);
    }

    #[test]
    fn two_subjects() {
        let params = WassersteinParams::default();
        let it = &items()[..2];
        let m = inter_subject_matrix(it, &params).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(m.get(0, 1), wasserstein_distance(&it[0].1, &it[1].1, &params).unwrap());
    }

    #[test]
    fn permuting_inputs_permutes_matrix() {
        let params = WassersteinParams::default();
        let it = items();
        let m = inter_subject_matrix(&it, &params).unwrap();
        let perm = [2, 0, 1];
        let shuffled: Vec<_> = perm.iter().map(|&k| it[k].clone()).collect();
        let p = inter_subject_matrix(&shuffled, &params).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(p.get(a, b), m.get(perm[a], perm[b]));
            }
        }
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let mut it = items();
        it[1].1.dimension = 0;
        assert!(matches!(
            inter_roi_matrix(&it, &WassersteinParams::default()),
            Err(Error::DimensionMismatch(1, 0))
        ));
    }

    #[test]
    fn csv_and_sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = inter_roi_matrix(&items(), &WassersteinParams::default()).unwrap();
        let path = dir.path().join("wd.csv");
        m.write(&path).unwrap();
        assert_eq!(DistanceMatrix::read(&path).unwrap(), m);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("r1,r2,r3\n0.0,"));
    }
}
