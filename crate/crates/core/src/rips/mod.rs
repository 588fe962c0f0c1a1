//! Vietoris-Rips filtrations of point clouds and their persistence diagrams.

mod filtration;
mod reduction;

pub use filtration::{FilteredComplex, Simplex, MAX_SIMPLEX_DIM};
pub use reduction::{compute_persistence, reduce, IndexPair};

use crate::diagram::PersistenceDiagram;
use crate::embedding::PointCloud;
use crate::error::{Error, Result};

use filtration::{distance_matrix, enumerate_flag_complex};

/// Default cap on the number of simplices a single filtration may hold.
pub const DEFAULT_MAX_SIMPLICES: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Threshold {
    /// Resolve to the enclosing radius of the cloud.
    #[default]
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSpec {
    pub metric: Metric,
    pub threshold: Threshold,
    pub max_simplices: usize,
}

impl Default for DistanceSpec {
    fn default() -> Self {
        Self {
            metric: Metric::Euclidean,
            threshold: Threshold::Auto,
            max_simplices: DEFAULT_MAX_SIMPLICES,
        }
    }
}

impl DistanceSpec {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold: Threshold::Value(threshold),
            ..Self::default()
        }
    }

    /// Concrete threshold for `cloud`.
    pub fn resolve(&self, cloud: &PointCloud) -> Result<f64> {
        match self.threshold {
            Threshold::Auto => enclosing_radius(cloud),
            Threshold::Value(t) if t > 0.0 && !t.is_nan() => Ok(t),
            Threshold::Value(t) => Err(Error::InvalidArgument(format!(
                "Rips threshold must be positive, got {t}"
            ))),
        }
    }
}

/// `min_p max_q dist(p, q)`. Past this radius the Rips complex is a cone, so
/// truncating there keeps every finite pair.
pub fn enclosing_radius(cloud: &PointCloud) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::InsufficientData("empty point cloud".into()));
    }
    let n = cloud.len();
    let d = distance_matrix(&cloud.points);
    Ok((0..n)
        .map(|i| d[i * n..(i + 1) * n].iter().copied().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min))
}

/// Every clique of dimension at most `max_dim + 1` with diameter within the
/// resolved threshold, valued at its diameter (vertices at 0).
pub fn build_rips_filtration(
    cloud: &PointCloud,
    spec: &DistanceSpec,
    max_dim: usize,
) -> Result<FilteredComplex> {
    if max_dim + 1 > MAX_SIMPLEX_DIM {
        return Err(Error::InvalidArgument(format!(
            "max_dim must be at most {}, got {max_dim}",
            MAX_SIMPLEX_DIM - 1
        )));
    }
    let threshold = spec.resolve(cloud)?;
    let n = cloud.len();
    if n > u32::MAX as usize {
        return Err(Error::ResourceLimit(format!("{n} points")));
    }
    let d = match spec.metric {
        Metric::Euclidean => distance_matrix(&cloud.points),
    };
    let simplices = enumerate_flag_complex(&d, n, threshold, max_dim + 1, spec.max_simplices)?;
    Ok(FilteredComplex {
        simplices,
        max_dim,
        threshold,
        n_vertices: n,
    })
}

/// Build, reduce, and drop zero-persistence pairs: the serialized form.
pub fn rips_diagrams(
    cloud: &PointCloud,
    spec: &DistanceSpec,
    max_dim: usize,
) -> Result<Vec<PersistenceDiagram>> {
    let complex = build_rips_filtration(cloud, spec, max_dim)?;
    Ok(compute_persistence(&complex)
        .into_iter()
        .map(|d| d.without_zero_persistence())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::PersistencePair;

    fn cloud(points: Vec<Vec<f64>>) -> PointCloud {
        PointCloud::from_points("t", points).unwrap()
    }

    fn square() -> PointCloud {
        cloud(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
    }

    #[test]
    fn enclosing_radius_examples() {
        assert_eq!(enclosing_radius(&cloud(vec![vec![0.0], vec![1.0]])).unwrap(), 1.0);
        assert_eq!(enclosing_radius(&square()).unwrap(), 2f64.sqrt());
        assert!(enclosing_radius(&cloud(vec![])).is_err());
    }

    #[test]
    fn two_points() {
        let c = cloud(vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let k = build_rips_filtration(&c, &DistanceSpec::default(), 1).unwrap();
        let s: Vec<(Vec<u32>, f64)> = k.simplices.iter().map(|s| (s.vertices().to_vec(), s.value)).collect();
        assert_eq!(s, vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 1.0)]);
        let dg = rips_diagrams(&c, &DistanceSpec::default(), 2).unwrap();
        assert_eq!(dg[0].pairs, vec![PersistencePair::new(0.0, 1.0), PersistencePair::essential(0.0)]);
        assert!(dg[1].is_empty() && dg[2].is_empty());
    }

    #[test]
    fn square_complex_counts() {
        let k = build_rips_filtration(&square(), &DistanceSpec::with_threshold(2f64.sqrt()), 1).unwrap();
        assert_eq!(k.count_by_dim(), vec![4, 6, 4]);
        let unit_edges = k.simplices.iter().filter(|s| s.dim() == 1 && s.value == 1.0).count();
        assert_eq!(unit_edges, 4);
        assert!(k.simplices.iter().filter(|s| s.dim() == 2).all(|s| s.value == 2f64.sqrt()));
        assert!(k.simplices.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn square_h1() {
        let dg = rips_diagrams(&square(), &DistanceSpec::default(), 2).unwrap();
        assert_eq!(dg[1].pairs, vec![PersistencePair::new(1.0, 2f64.sqrt())]);
        assert!(dg[2].is_empty());
    }

    #[test]
    fn threshold_below_min_distance_gives_vertices_only() {
        let k = build_rips_filtration(&square(), &DistanceSpec::with_threshold(0.5), 2).unwrap();
        assert_eq!(k.len(), 4);
        let dg = compute_persistence(&k);
        assert_eq!(dg[0].essential_count(), 4);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_rips_filtration(&square(), &DistanceSpec::with_threshold(-1.0), 1).is_err());
        assert!(build_rips_filtration(&square(), &DistanceSpec::default(), 4).is_err());
    }

    #[test]
    fn resource_guard_reports_limit() {
        let spec = DistanceSpec {
            max_simplices: 10,
            ..DistanceSpec::default()
        };
        let err = build_rips_filtration(&square(), &spec, 2).unwrap_err();
        assert!(err.is_resource_limit(), "{err}");
        assert!(err.to_string().contains("estimate"));
    }
}
