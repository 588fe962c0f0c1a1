use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Largest simplex dimension the filtration can hold (`max_dim` 3 needs 4-simplices).
pub const MAX_SIMPLEX_DIM: usize = 4;

/// A simplex with its filtration value. Vertices are stored sorted ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [u32; MAX_SIMPLEX_DIM + 1],
    len: u8,
    pub value: f64,
}

impl Simplex {
    pub fn new(vertices: &[u32], value: f64) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.len() <= MAX_SIMPLEX_DIM + 1);
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        let mut verts = [0; MAX_SIMPLEX_DIM + 1];
        verts[..vertices.len()].copy_from_slice(vertices);
        Self {
            verts,
            len: vertices.len() as u8,
            value,
        }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.verts[..self.len as usize]
    }

    pub fn dim(&self) -> usize {
        self.len as usize - 1
    }

    pub(crate) fn key(&self) -> [u32; MAX_SIMPLEX_DIM + 1] {
        // unused slots are zero, and length differs per dimension, so
        // keys of different dimensions can collide; lookups are per dimension.
        self.verts
    }

    /// Codimension-one faces, each obtained by dropping one vertex.
    pub fn facets(&self) -> impl Iterator<Item = ([u32; MAX_SIMPLEX_DIM + 1], usize)> + '_ {
        let n = self.len as usize;
        (0..n).filter(move |_| n > 1).map(move |skip| {
            let mut out = [0; MAX_SIMPLEX_DIM + 1];
            let mut k = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    out[k] = v;
                    k += 1;
                }
            }
            (out, n - 2)
        })
    }

    /// Filtration order: value, then dimension, then lexicographic vertices.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Simplices of a Rips filtration in filtration order.
#[derive(Debug, Clone)]
pub struct FilteredComplex {
    pub simplices: Vec<Simplex>,
    /// Highest homology dimension the complex is built to resolve.
    pub max_dim: usize,
    pub threshold: f64,
    pub n_vertices: usize,
}

impl FilteredComplex {
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_dim + 2];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }
}

/// Euclidean distance matrix, row-major.
pub(crate) fn distance_matrix(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(&points[i], &points[j]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All cliques of `dist` with diameter at most `threshold` and at most
/// `top_dim + 1` vertices, sorted into filtration order.
pub(crate) fn enumerate_flag_complex(
    dist: &[f64],
    n: usize,
    threshold: f64,
    top_dim: usize,
    max_simplices: usize,
) -> Result<Vec<Simplex>> {
    // neighbours with a larger index, ascending
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            ((i + 1)..n)
                .filter(|&j| dist[i * n + j] <= threshold)
                .map(|j| j as u32)
                .collect()
        })
        .collect();

    let estimate: f64 = n as f64
        + upper
            .iter()
            .map(|nb| (1..=top_dim).map(|k| binomial(nb.len(), k)).sum::<f64>())
            .sum::<f64>();
    let guard = |count: usize| {
        if count > max_simplices {
            Err(Error::ResourceLimit(format!(
                "Rips complex on {n} points up to dimension {top_dim} at threshold {threshold} \
                 needs more than {max_simplices} simplices (upper estimate {estimate:.3e}); \
                 lower the threshold or max dimension"
            )))
        } else {
            Ok(())
        }
    };

    let mut out = Vec::new();
    if estimate <= max_simplices as f64 {
        out.reserve(estimate as usize);
    }
    let mut stack: Vec<u32> = Vec::with_capacity(top_dim + 1);
    for v in 0..n {
        out.push(Simplex::new(&[v as u32], 0.0));
        guard(out.len())?;
        stack.clear();
        stack.push(v as u32);
        extend_cliques(dist, n, &upper, &upper[v], 0.0, top_dim, &mut stack, &mut out, &guard)?;
    }
    out.sort_by(Simplex::filtration_cmp);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend_cliques(
    dist: &[f64],
    n: usize,
    upper: &[Vec<u32>],
    candidates: &[u32],
    diameter: f64,
    top_dim: usize,
    stack: &mut Vec<u32>,
    out: &mut Vec<Simplex>,
    guard: &dyn Fn(usize) -> Result<()>,
) -> Result<()> {
    if stack.len() > top_dim {
        return Ok(());
    }
    for (ci, &w) in candidates.iter().enumerate() {
        let mut diam = diameter;
        for &u in stack.iter() {
            diam = diam.max(dist[u as usize * n + w as usize]);
        }
        stack.push(w);
        out.push(Simplex::new(stack, diam));
        guard(out.len())?;
        if stack.len() <= top_dim {
            // remaining candidates adjacent to w
            let next: Vec<u32> = candidates[ci + 1..]
                .iter()
                .copied()
                .filter(|x| upper[w as usize].binary_search(x).is_ok())
                .collect();
            if !next.is_empty() {
                extend_cliques(dist, n, upper, &next, diam, top_dim, stack, out, guard)?;
            }
        }
        stack.pop();
    }
    Ok(())
}
