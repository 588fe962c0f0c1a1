//! Boundary-matrix column reduction over GF(2) with clearing.
//!
//! Columns are processed from the highest dimension down. Whenever a column
//! of dimension `d` ends up with pivot row `i`, simplex `i` is known to create
//! a class, so its own column (dimension `d - 1`) is never reduced.

use std::collections::HashMap;

use crate::diagram::{PersistenceDiagram, PersistencePair};

use super::filtration::{FilteredComplex, MAX_SIMPLEX_DIM};

/// A persistence pair expressed as filtration indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexPair {
    pub dim: usize,
    pub birth: usize,
    pub death: Option<usize>,
}

/// Symmetric difference of two ascending index lists.
fn add_columns(target: &mut Vec<u32>, source: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Reduce the boundary matrix of `complex` and return all pairs, including
/// zero-persistence ones, with essential classes in dimensions `0..=max_dim`.
pub fn reduce(complex: &FilteredComplex) -> Vec<IndexPair> {
    let simplices = &complex.simplices;
    let n = simplices.len();
    let top_dim = complex.max_dim + 1;

    let mut index: Vec<HashMap<[u32; MAX_SIMPLEX_DIM + 1], u32>> = vec![HashMap::new(); top_dim + 1];
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top_dim + 1];
    for (pos, s) in simplices.iter().enumerate() {
        index[s.dim()].insert(s.key(), pos as u32);
        by_dim[s.dim()].push(pos as u32);
    }

    // pivot_of_row[i] = column whose reduced form has lowest entry i
    let mut pivot_of_row: Vec<u32> = vec![u32::MAX; n];
    let mut cleared = vec![false; n];
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();

    for dim in (1..=top_dim).rev() {
        for &col in &by_dim[dim] {
            if cleared[col as usize] {
                continue;
            }
            let s = &simplices[col as usize];
            let mut column: Vec<u32> = s
                .facets()
                .map(|(key, fdim)| index[fdim][&key])
                .collect();
            column.sort_unstable();
            while let Some(&low) = column.last() {
                let owner = pivot_of_row[low as usize];
                if owner == u32::MAX {
                    break;
                }
                add_columns(&mut column, &reduced[&owner], &mut scratch);
            }
            if let Some(&low) = column.last() {
                pivot_of_row[low as usize] = col;
                cleared[low as usize] = true;
                pairs.push(IndexPair {
                    dim: dim - 1,
                    birth: low as usize,
                    death: Some(col as usize),
                });
                reduced.insert(col, column);
            }
        }
    }

    // essential: never a pivot row, and column reduced to zero (not a death)
    let mut is_death = vec![false; n];
    for p in &pairs {
        if let Some(d) = p.death {
            is_death[d] = true;
        }
    }
    for dim in 0..=complex.max_dim {
        for &pos in &by_dim[dim] {
            let pos = pos as usize;
            if pivot_of_row[pos] == u32::MAX && !is_death[pos] {
                pairs.push(IndexPair {
                    dim,
                    birth: pos,
                    death: None,
                });
            }
        }
    }
    pairs
}

/// Persistence diagrams for dimensions `0..=max_dim`, zero-persistence pairs included.
pub fn compute_persistence(complex: &FilteredComplex) -> Vec<PersistenceDiagram> {
    let mut diagrams: Vec<PersistenceDiagram> =
        (0..=complex.max_dim).map(PersistenceDiagram::empty).collect();
    for p in reduce(complex) {
        if p.dim > complex.max_dim {
            continue;
        }
        let birth = complex.simplices[p.birth].value;
        let death = p.death.map_or(f64::INFINITY, |d| complex.simplices[d].value);
        diagrams[p.dim].pairs.push(PersistencePair::new(birth, death));
    }
    for d in &mut diagrams {
        d.pairs.sort_by(PersistencePair::total_cmp);
    }
    diagrams
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut a = vec![1, 3, 5, 9];
        let mut s = Vec::new();
        add_columns(&mut a, &[3, 4, 9], &mut s);
        assert_eq!(a, vec![1, 4, 5]);
        add_columns(&mut a, &[1, 4, 5], &mut s);
        assert!(a.is_empty());
    }
}
