//! Maximum bipartite matching (Hopcroft-Karp) on a dense adjacency predicate.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Size of a maximum matching between `n` left and `n` right vertices where
/// `adj(l, r)` says whether the edge exists.
pub fn max_matching(n: usize, adj: &dyn Fn(usize, usize) -> bool) -> usize {
    let neighbours: Vec<Vec<usize>> = (0..n).map(|l| (0..n).filter(|&r| adj(l, r)).collect()).collect();
    let mut match_l = vec![NIL; n];
    let mut match_r = vec![NIL; n];
    let mut dist = vec![0usize; n];
    let mut size = 0;
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        let mut found = false;
        for l in 0..n {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        while let Some(l) = queue.pop_front() {
            for &r in &neighbours[l] {
                let m = match_r[r];
                if m == NIL {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            break;
        }
        for l in 0..n {
            if match_l[l] == NIL && augment(l, &neighbours, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }
    size
}

fn augment(
    l: usize,
    neighbours: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &r in &neighbours[l] {
        let m = match_r[r];
        if m == NIL || (dist[m] == dist[l] + 1 && augment(m, neighbours, match_l, match_r, dist)) {
            match_l[l] = r;
            match_r[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}
