//! Positively gated correlation graphs and their graph-filtration persistence.
//!
//! A graph filtration is a 1-dimensional complex: vertices and edges only.
//! H0 follows the elder rule through union-find; every edge that closes a
//! cycle creates an H1 class that never dies.

use std::fs;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::diagram::{PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::ingest::TimeSeriesTable;

/// Condition number above which the default pipeline falls back to shrinkage.
pub const CONDITION_LIMIT: f64 = 1e8;
/// Shrinkage used by the fallback.
pub const FALLBACK_SHRINKAGE: f64 = 0.1;

/// Pearson correlation between every pair of channels.
pub fn pearson_correlation_matrix(table: &TimeSeriesTable) -> Result<DMatrix<f64>> {
    let t = table.timepoints();
    let n = table.channels();
    if t < 3 {
        return Err(Error::InsufficientData(format!("{t} timepoints")));
    }
    let mut centered = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for c in 0..n {
        let col = table.column(c);
        let mean = col.iter().sum::<f64>() / t as f64;
        let dev: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let ss = dev.iter().map(|v| v * v).sum::<f64>();
        if ss <= 0.0 {
            return Err(Error::ZeroVariance(table.channel_names()[c].clone()));
        }
        norms.push(ss.sqrt());
        centered.push(dev);
    }
    let mut r = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let v = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

fn check_square_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!("{what} is {}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// 2-norm condition number of a symmetric matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let abs: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `rho_ij = -P_ij / sqrt(P_ii P_jj)` with `P` the inverse of
/// `(1 - shrinkage) * corr + shrinkage * I`. The diagonal is set to 1.
pub fn partial_correlation_matrix(corr: &DMatrix<f64>, shrinkage: f64) -> Result<DMatrix<f64>> {
    check_square_symmetric(corr, "correlation matrix")?;
    if !(0.0..1.0).contains(&shrinkage) {
        return Err(Error::InvalidArgument(format!("shrinkage must lie in [0, 1), got {shrinkage}")));
    }
    let n = corr.nrows();
    let shrunk = corr * (1.0 - shrinkage) + DMatrix::<f64>::identity(n, n) * shrinkage;
    if n <= 2 {
        // nothing to condition on
        if n == 2 && shrunk[(0, 1)].abs() >= 1.0 {
            return Err(Error::SingularMatrix);
        }
        let mut out = shrunk;
        out.fill_diagonal(1.0);
        return Ok(out);
    }
    let precision = shrunk
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| shrunk.try_inverse())
        .ok_or(Error::SingularMatrix)?;
    if precision.iter().any(|v| !v.is_finite()) || (0..n).any(|i| precision[(i, i)] <= 0.0) {
        return Err(Error::SingularMatrix);
    }
    let mut out = DMatrix::identity(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = -precision[(i, j)] / (precision[(i, i)] * precision[(j, j)]).sqrt();
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Partial correlations with the ill-conditioning fallback: when the
/// requested shrinkage is zero and the condition number exceeds
/// [`CONDITION_LIMIT`], retry at [`FALLBACK_SHRINKAGE`]. Returns the matrix
/// and the shrinkage actually applied.
pub fn partial_correlation_with_fallback(
    corr: &DMatrix<f64>,
    shrinkage: f64,
) -> Result<(DMatrix<f64>, f64)> {
    if shrinkage == 0.0 {
        let cond = condition_number(corr);
        if cond > CONDITION_LIMIT {
            warn!(
                "correlation matrix condition number {cond:.3e} exceeds {CONDITION_LIMIT:e}; \
                 using shrinkage {FALLBACK_SHRINKAGE}"
            );
            return Ok((partial_correlation_matrix(corr, FALLBACK_SHRINKAGE)?, FALLBACK_SHRINKAGE));
        }
    }
    Ok((partial_correlation_matrix(corr, shrinkage)?, shrinkage))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    #[default]
    Marginal,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTransform {
    #[default]
    OneMinusW,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Sublevel,
    Superlevel,
}

/// Undirected edge `i < j` with weight `w`. JSON form: `[i, j, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge(pub usize, pub usize, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
}

impl WeightedGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let g = Self { vertices, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for &Edge(i, j, w) in &self.edges {
            if i >= j || j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) must satisfy i < j < {n}")));
            }
            if !w.is_finite() {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) has weight {w}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        g.validate()?;
        Ok(g)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Keep edge `(i, j)` iff both the marginal and the partial correlation are
/// positive; its weight is taken from `source`.
pub fn build_positive_graph(
    vertices: Vec<String>,
    marginal: &DMatrix<f64>,
    partial: &DMatrix<f64>,
    source: WeightSource,
) -> Result<WeightedGraph> {
    if marginal.shape() != partial.shape() || !marginal.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "marginal {:?} vs partial {:?}",
            marginal.shape(),
            partial.shape()
        )));
    }
    if vertices.len() != marginal.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{} vertex names for a {}x{} matrix",
            vertices.len(),
            marginal.nrows(),
            marginal.ncols()
        )));
    }
    check_square_symmetric(marginal, "marginal correlation")?;
    check_square_symmetric(partial, "partial correlation")?;
    let n = marginal.nrows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if marginal[(i, j)] > 0.0 && partial[(i, j)] > 0.0 {
                let w = match source {
                    WeightSource::Marginal => marginal[(i, j)],
                    WeightSource::Partial => partial[(i, j)],
                };
                edges.push(Edge(i, j, w));
            }
        }
    }
    WeightedGraph::new(vertices, edges)
}

/// Filter values on a graph. Values are oriented so that the filtration
/// always adds simplices in ascending order: for a superlevel filtration the
/// stored values are the negated transformed weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFiltration {
    pub vertex_values: Vec<f64>,
    pub edge_values: Vec<Edge>,
    pub direction: Direction,
}

impl GraphFiltration {
    /// Vertex values become the minimum incident edge value, 0 when isolated.
    pub fn from_edge_values(n_vertices: usize, edges: Vec<Edge>, direction: Direction) -> Result<Self> {
        let mut vertex_values = vec![f64::INFINITY; n_vertices];
        for &Edge(i, j, v) in &edges {
            if i >= j || j >= n_vertices || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("bad filtration edge ({i}, {j}, {v})")));
            }
            vertex_values[i] = vertex_values[i].min(v);
            vertex_values[j] = vertex_values[j].min(v);
        }
        for v in &mut vertex_values {
            if v.is_infinite() {
                *v = 0.0;
            }
        }
        Ok(Self {
            vertex_values,
            edge_values: edges,
            direction,
        })
    }
}

pub fn graph_sublevel_filtration(
    graph: &WeightedGraph,
    transform: WeightTransform,
    direction: Direction,
) -> Result<GraphFiltration> {
    graph.validate()?;
    let sign = match direction {
        Direction::Sublevel => 1.0,
        Direction::Superlevel => -1.0,
    };
    let edges = graph
        .edges
        .iter()
        .map(|&Edge(i, j, w)| {
            let v = match transform {
                WeightTransform::Raw => w,
                WeightTransform::OneMinusW if w <= 1.0 => 1.0 - w,
                WeightTransform::OneMinusW => {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({i}, {j}) weight {w} exceeds 1 under the 1 - w transform"
                    )))
                }
            };
            Ok(Edge(i, j, sign * v))
        })
        .collect::<Result<Vec<_>>>()?;
    GraphFiltration::from_edge_values(graph.vertices.len(), edges, direction)
}

struct Components {
    parent: Vec<usize>,
    // (birth value, oldest vertex) per root
    elder: Vec<(f64, usize)>,
}

impl Components {
    fn new(births: &[f64]) -> Self {
        Self {
            parent: (0..births.len()).collect(),
            elder: births.iter().copied().zip(0..).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }
}

fn older(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// H0 and H1 diagrams of a graph filtration. Zero-persistence H0 pairs are kept.
pub fn graph_persistence(filt: &GraphFiltration) -> (PersistenceDiagram, PersistenceDiagram) {
    let mut edges = filt.edge_values.clone();
    edges.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut uf = Components::new(&filt.vertex_values);
    let mut h0 = Vec::new();
    let mut h1 = Vec::new();
    for Edge(i, j, value) in edges {
        let (ri, rj) = (uf.find(i), uf.find(j));
        if ri == rj {
            h1.push(PersistencePair::essential(value));
            continue;
        }
        let (ei, ej) = (uf.elder[ri], uf.elder[rj]);
        let (survivor, dying) = if older(ei, ej) { (ri, rj) } else { (rj, ri) };
        h0.push(PersistencePair::new(uf.elder[dying].0, value));
        uf.parent[dying] = survivor;
    }
    for v in 0..filt.vertex_values.len() {
        if uf.find(v) == v {
            h0.push(PersistencePair::essential(uf.elder[v].0));
        }
    }
    h0.sort_by(PersistencePair::total_cmp);
    h1.sort_by(PersistencePair::total_cmp);
    (PersistenceDiagram::new(0, h0), PersistenceDiagram::new(1, h1))
}

/// Replace infinite deaths with `cap`, for lifespan features.
pub fn cap_diagram(diagram: &PersistenceDiagram, cap: f64) -> PersistenceDiagram {
    PersistenceDiagram::new(
        diagram.dimension,
        diagram
            .pairs
            .iter()
            .map(|p| if p.is_essential() { PersistencePair::new(p.birth, cap.max(p.birth)) } else { *p })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn table(cols: &[&[f64]]) -> TimeSeriesTable {
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        let rows = (0..cols[0].len()).map(|t| cols.iter().map(|c| c[t]).collect()).collect();
        TimeSeriesTable::new("s", names, rows).unwrap()
    }

    #[test]
    fn pearson_basic_identities() {
        let x = [1.0, 2.0, 4.0, 3.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = pearson_correlation_matrix(&table(&[&x, &x, &neg])).unwrap();
        assert!((r[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((r[(0, 2)] + 1.0).abs() < 1e-15);
        assert_eq!(r[(1, 1)], 1.0);
    }

    #[test]
    fn zero_variance_column_is_named() {
        let err = pearson_correlation_matrix(&table(&[&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]])).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(ref c) if c == "c1"));
    }

    #[test]
    fn partial_of_two_variables_is_marginal() {
        let c = dmatrix![1.0, 0.3; 0.3, 1.0];
        let p = partial_correlation_matrix(&c, 0.0).unwrap();
        assert_eq!(p[(0, 1)], 0.3);
    }

    #[test]
    fn partial_of_equicorrelation() {
        let c = dmatrix![1.0, 0.5, 0.5; 0.5, 1.0, 0.5; 0.5, 0.5, 1.0];
        let p = partial_correlation_matrix(&c, 0.0).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((p[(i, j)] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_of_identity_is_identity() {
        let p = partial_correlation_matrix(&DMatrix::identity(4, 4), 0.0).unwrap();
        assert_eq!(p, DMatrix::identity(4, 4));
    }

    #[test]
    fn singular_without_shrinkage() {
        let c = dmatrix![1.0, 1.0; 1.0, 1.0];
        assert!(matches!(partial_correlation_matrix(&c, 0.0), Err(Error::SingularMatrix)));
        assert!(partial_correlation_matrix(&c, 0.1).is_ok());
        let (_, used) = partial_correlation_with_fallback(&c, 0.0).unwrap();
        assert_eq!(used, FALLBACK_SHRINKAGE);
    }

    #[test]
    fn gate_rules() {
        let m = dmatrix![1.0, 0.6, 0.6; 0.6, 1.0, 0.6; 0.6, 0.6, 1.0];
        let p = dmatrix![1.0, -0.1, 0.2; -0.1, 1.0, 0.2; 0.2, 0.2, 1.0];
        let names = vec!["a".into(), "b".into(), "c".into()];
        let g = build_positive_graph(names.clone(), &m, &p, WeightSource::Marginal).unwrap();
        assert_eq!(g.edges, vec![Edge(0, 2, 0.6), Edge(1, 2, 0.6)]);
        let g = build_positive_graph(names.clone(), &m, &p, WeightSource::Partial).unwrap();
        assert_eq!(g.edges[0], Edge(0, 2, 0.2));
        let id = DMatrix::identity(3, 3);
        let g = build_positive_graph(names, &id, &id, WeightSource::Marginal).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.vertices.len(), 3);
    }

    #[test]
    fn gate_shape_mismatch() {
        let err = build_positive_graph(vec!["a".into(), "b".into()], &DMatrix::identity(2, 2), &DMatrix::identity(3, 3), WeightSource::Marginal);
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn one_minus_w_transform() {
        let g = WeightedGraph::new(vec!["a".into(), "b".into()], vec![Edge(0, 1, 0.9)]).unwrap();
        let f = graph_sublevel_filtration(&g, WeightTransform::OneMinusW, Direction::Sublevel).unwrap();
        assert!((f.edge_values[0].2 - 0.1).abs() < 1e-15);
        let bad = WeightedGraph::new(vec!["a".into(), "b".into()], vec![Edge(0, 1, 1.5)]).unwrap();
        assert!(graph_sublevel_filtration(&bad, WeightTransform::OneMinusW, Direction::Sublevel).is_err());
    }

    #[test]
    fn vertex_values_are_min_incident() {
        let g = WeightedGraph::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![Edge(0, 1, 0.2), Edge(1, 2, 0.5), Edge(0, 2, 0.9)],
        )
        .unwrap();
        let f = graph_sublevel_filtration(&g, WeightTransform::Raw, Direction::Sublevel).unwrap();
        assert_eq!(f.vertex_values, vec![0.2, 0.2, 0.5, 0.0]);
    }

    #[test]
    fn worked_four_cycle() {
        let g = WeightedGraph::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![Edge(0, 1, 0.1), Edge(2, 3, 0.2), Edge(1, 2, 0.5), Edge(0, 3, 0.8)],
        )
        .unwrap();
        let f = graph_sublevel_filtration(&g, WeightTransform::Raw, Direction::Sublevel).unwrap();
        let (h0, h1) = graph_persistence(&f);
        assert_eq!(
            h0.pairs,
            vec![
                PersistencePair::new(0.1, 0.1),
                PersistencePair::essential(0.1),
                PersistencePair::new(0.2, 0.2),
                PersistencePair::new(0.2, 0.5),
            ]
        );
        assert_eq!(h1.pairs, vec![PersistencePair::essential(0.8)]);
    }

    #[test]
    fn tree_has_no_cycles() {
        let g = WeightedGraph::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec![Edge(0, 1, 0.3), Edge(1, 2, 0.4), Edge(1, 3, 0.5)],
        )
        .unwrap();
        let f = graph_sublevel_filtration(&g, WeightTransform::Raw, Direction::Sublevel).unwrap();
        let (h0, h1) = graph_persistence(&f);
        assert!(h1.is_empty());
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.essential_count(), 1);
    }

    #[test]
    fn isolated_vertex_contributes_essential_bar_at_zero() {
        let g = WeightedGraph::new(vec!["a".into(), "b".into(), "c".into()], vec![Edge(0, 1, 0.4)]).unwrap();
        let f = graph_sublevel_filtration(&g, WeightTransform::OneMinusW, Direction::Sublevel).unwrap();
        let (h0, _) = graph_persistence(&f);
        assert!(h0.pairs.contains(&PersistencePair::essential(0.0)));
        assert_eq!(h0.essential_count(), 2);
    }

    #[test]
    fn cap_replaces_infinite_deaths() {
        let d = PersistenceDiagram::new(1, vec![PersistencePair::essential(0.3), PersistencePair::new(0.1, 0.2)]);
        let c = cap_diagram(&d, 1.0);
        assert_eq!(c.pairs[0], PersistencePair::new(0.3, 1.0));
        assert_eq!(c.pairs[1], PersistencePair::new(0.1, 0.2));
    }

    #[test]
    fn graph_json_layout() {
        let g = WeightedGraph::new(vec!["a".into(), "b".into()], vec![Edge(0, 1, 0.5)]).unwrap();
        assert_eq!(g.to_json(), r#"{"vertices":["a","b"],"edges":[[0,1,0.5]]}"#);
    }
}
