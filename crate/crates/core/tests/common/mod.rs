//! Independent reference implementations used by the integration tests.
//! Each one favours obviousness over speed.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use ph_connect::{PersistenceDiagram, PersistencePair};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Full Rips persistence by brute force: every vertex subset of size at most
/// `max_dim + 2` is a simplex valued at its diameter, the boundary matrix is
/// reduced column by column without any optimisation, and zero-persistence
/// pairs are discarded.
pub fn naive_rips(points: &[Vec<f64>], max_dim: usize) -> Vec<Vec<(f64, f64)>> {
    let n = points.len();
    assert!(n <= 16);
    let mut simplices: Vec<(f64, u32)> = Vec::new();
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k > max_dim + 2 {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut diam: f64 = 0.0;
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                diam = diam.max(dist(&points[verts[a]], &points[verts[b]]));
            }
        }
        simplices.push((diam, mask));
    }
    simplices.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.count_ones().cmp(&b.1.count_ones()))
            .then(a.1.cmp(&b.1))
    });
    let index: std::collections::HashMap<u32, usize> =
        simplices.iter().enumerate().map(|(i, s)| (s.1, i)).collect();
    let mut columns: Vec<BTreeSet<usize>> = simplices
        .iter()
        .map(|&(_, mask)| {
            if mask.count_ones() == 1 {
                return BTreeSet::new();
            }
            (0..n)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| index[&(mask & !(1 << i))])
                .collect()
        })
        .collect();
    let mut low_owner: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut diagrams = vec![Vec::new(); max_dim + 1];
    let mut paired = vec![false; simplices.len()];
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].iter().next_back() {
            match low_owner.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    for r in other {
                        if !columns[j].remove(&r) {
                            columns[j].insert(r);
                        }
                    }
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].iter().next_back() {
            low_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            let dim = simplices[low].1.count_ones() as usize - 1;
            if dim <= max_dim && simplices[low].0 != simplices[j].0 {
                diagrams[dim].push((simplices[low].0, simplices[j].0));
            }
        }
    }
    for (i, &(v, mask)) in simplices.iter().enumerate() {
        let dim = mask.count_ones() as usize - 1;
        if !paired[i] && columns[i].is_empty() && dim <= max_dim {
            diagrams[dim].push((v, f64::INFINITY));
        }
    }
    for d in &mut diagrams {
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    diagrams
}

pub fn as_tuples(d: &PersistenceDiagram) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = d.pairs.iter().map(|p| (p.birth, p.death)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v
}

/// Prim's algorithm on the complete Euclidean graph; sorted edge lengths.
pub fn mst_edge_lengths(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut lengths = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            lengths.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dist(&points[u], &points[v]));
            }
        }
    }
    lengths.sort_by(f64::total_cmp);
    lengths
}

/// Random diagram with `n` finite off-diagonal points in `[0, scale]`.
pub fn random_diagram(rng: &mut ChaCha8Rng, dim: usize, n: usize, scale: f64) -> PersistenceDiagram {
    let pairs = (0..n)
        .map(|_| {
            let b = rng.random::<f64>() * scale;
            let d = b + rng.random::<f64>() * scale + 1e-6;
            PersistencePair::new(b, d)
        })
        .collect();
    PersistenceDiagram::new(dim, pairs)
}

fn linf(a: (f64, f64), b: (f64, f64), q: f64) -> f64 {
    let db = (a.0 - b.0).abs();
    let dd = (a.1 - b.1).abs();
    if q.is_infinite() {
        db.max(dd)
    } else {
        (db.powf(q) + dd.powf(q)).powf(1.0 / q)
    }
}

fn to_diag(a: (f64, f64), q: f64) -> f64 {
    // nearest diagonal point is the midpoint projection
    let m = (a.0 + a.1) / 2.0;
    linf(a, (m, m), q)
}

/// Wasserstein distance by enumerating every partial matching between the
/// finite points; unmatched points go to the diagonal. `p = inf` takes the
/// maximum instead of the p-sum.
pub fn brute_wasserstein(d1: &[(f64, f64)], d2: &[(f64, f64)], p: f64, q: f64) -> f64 {
    fn go(
        i: usize,
        d1: &[(f64, f64)],
        d2: &[(f64, f64)],
        used: &mut Vec<bool>,
        acc: Vec<f64>,
        p: f64,
        q: f64,
        best: &mut f64,
    ) {
        if i == d1.len() {
            let mut terms = acc;
            for (j, &b) in d2.iter().enumerate() {
                if !used[j] {
                    terms.push(to_diag(b, q));
                }
            }
            let v = if p.is_infinite() {
                terms.iter().cloned().fold(0.0, f64::max)
            } else {
                terms.iter().map(|t| t.powf(p)).sum::<f64>().powf(1.0 / p)
            };
            if v < *best {
                *best = v;
            }
            return;
        }
        let mut with_diag = acc.clone();
        with_diag.push(to_diag(d1[i], q));
        go(i + 1, d1, d2, used, with_diag, p, q, best);
        for j in 0..d2.len() {
            if !used[j] {
                used[j] = true;
                let mut next = acc.clone();
                next.push(linf(d1[i], d2[j], q));
                go(i + 1, d1, d2, used, next, p, q, best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, d1, d2, &mut vec![false; d2.len()], Vec::new(), p, q, &mut best);
    best
}

/// Two-sided rank-sum p-value by enumerating every assignment of ranks to the
/// first sample (tie-free data).
pub fn brute_wilcoxon(x: &[f64], y: &[f64]) -> f64 {
    let mut all: Vec<f64> = x.iter().chain(y).copied().collect();
    all.sort_by(f64::total_cmp);
    let rank = |v: f64| all.iter().position(|&a| a == v).unwrap() as f64 + 1.0;
    let w: f64 = x.iter().map(|&v| rank(v)).sum();
    let n = all.len();
    let k = x.len();
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let s: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| i as f64 + 1.0).sum();
        total += 1;
        if s <= w {
            le += 1;
        }
        if s >= w {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

/// Partial correlation of columns `i` and `j` of `data` (rows are samples):
/// correlate the residuals of both after least-squares regression on all
/// other columns plus an intercept.
pub fn regression_partial(data: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let (t, n) = data.shape();
    let others: Vec<usize> = (0..n).filter(|&c| c != i && c != j).collect();
    let mut design = DMatrix::from_element(t, others.len() + 1, 1.0);
    for (k, &c) in others.iter().enumerate() {
        design.set_column(k + 1, &data.column(c));
    }
    let residual = |c: usize| -> DVector<f64> {
        let y: DVector<f64> = data.column(c).into_owned();
        let svd = design.clone().svd(true, true);
        let beta = svd.solve(&y, 1e-14).unwrap();
        y - &design * beta
    };
    let (ri, rj) = (residual(i), residual(j));
    ri.dot(&rj) / (ri.norm() * rj.norm())
}

/// Sorted connected-component count of an undirected graph by DFS.
pub fn component_count(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

/// Central finite-difference gradient.
pub fn finite_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}
