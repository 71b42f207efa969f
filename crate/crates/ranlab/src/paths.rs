//! Longest-path machinery on RANs: exact search at small `t`, a greedy
//! lower-bound heuristic over the Δ-tree, the path → triangle trace
//! `R(P)`, and the buono-subtree upper bound `|V(P)| ≤ 3 + |R(P)|`.

use crate::apollonian::{DeltaTree, RanGraph};
use crate::subtree_dp::largest_buono_subtree;
use crate::{Error, Result};

/// Default exact-search cap: longest path is NP-hard, so exact search is
/// restricted to `t ≤ 12` (at most 15 vertices) unless overridden.
pub const DEFAULT_EXACT_CAP_T: u64 = 12;

/// How a path was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMethod {
    Exact,
    Heuristic,
}

/// A simple path: `length` counts vertices, matching the paper-level
/// convention for `L_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub length: u64,
    pub path: Vec<u32>,
    pub method: PathMethod,
}

/// Checks that `path` is a nonempty simple path of the graph.
pub fn validate_path(ran: &RanGraph, path: &[u32]) -> Result<()> {
    if path.is_empty() {
        return Err(Error::param("empty path"));
    }
    let n = ran.vertex_count() as u32;
    let mut seen = vec![false; n as usize];
    for (i, &v) in path.iter().enumerate() {
        if v >= n {
            return Err(Error::param(format!("vertex {v} out of range")));
        }
        if seen[v as usize] {
            return Err(Error::param(format!("vertex {v} repeats")));
        }
        seen[v as usize] = true;
        if i > 0 && !ran.are_adjacent(path[i - 1], v) {
            return Err(Error::param(format!(
                "vertices {} and {v} are not adjacent",
                path[i - 1]
            )));
        }
    }
    Ok(())
}

/// Certified upper bound on the longest path of this realization:
/// `3 + (largest buono subtree of the Δ-tree)`.
pub fn buono_upper_bound(delta: &DeltaTree) -> u64 {
    3 + largest_buono_subtree(delta.arena())
        .expect("Δ-tree is 3-ary")
        .size
}

/// The deterministic lower bound `(2t+1)^(log 2 / log 3)` on `L_t`.
pub fn deterministic_path_lower_bound(t: u64) -> f64 {
    ((2 * t + 1) as f64).powf(2f64.ln() / 3f64.ln())
}

struct ExactSearch<'a> {
    neighbors: Vec<Vec<u32>>,
    masks: &'a [u64],
    best: Vec<u32>,
    upper: usize,
    done: bool,
}

impl ExactSearch<'_> {
    /// Unvisited vertices reachable from `cur` through unvisited vertices.
    fn reachable(&self, cur: u32, visited: u64) -> u32 {
        let mut seen = self.masks[cur as usize] & !visited;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0u64;
            let mut bits = frontier;
            while bits != 0 {
                let v = bits.trailing_zeros();
                bits &= bits - 1;
                next |= self.masks[v as usize];
            }
            frontier = next & !visited & !seen;
            seen |= frontier;
        }
        seen.count_ones()
    }

    fn dfs(&mut self, path: &mut Vec<u32>, visited: u64) {
        if self.done {
            return;
        }
        if path.len() > self.best.len() {
            self.best = path.clone();
            if self.best.len() >= self.upper {
                self.done = true;
                return;
            }
        }
        let cur = *path.last().expect("nonempty");
        // Keep exploring ties: the first maximum found in lexicographic
        // pre-order is the lexicographically smallest one.
        if path.len() + (self.reachable(cur, visited) as usize) < self.best.len() {
            return;
        }
        for i in 0..self.neighbors[cur as usize].len() {
            let next = self.neighbors[cur as usize][i];
            if visited & (1 << next) == 0 {
                path.push(next);
                self.dfs(path, visited | (1 << next));
                path.pop();
                if self.done {
                    return;
                }
            }
        }
    }
}

/// Exact longest simple path by pruned DFS over ordered start vertices.
/// Pruning: the remaining-reachable-set bound, plus the buono upper bound
/// as a global cutoff. Among maximum paths the lexicographically smallest
/// is returned. Fails with [`Error::TooLarge`] above the cap.
pub fn longest_path_exact_with_cap(
    ran: &RanGraph,
    delta: &DeltaTree,
    cap_t: u64,
) -> Result<PathResult> {
    if ran.t() > cap_t {
        return Err(Error::TooLarge(format!(
            "t = {} exceeds the exact-search cap {cap_t}; use the heuristic",
            ran.t()
        )));
    }
    let n = ran.vertex_count();
    if n > 64 {
        return Err(Error::TooLarge(format!("{n} vertices exceed 64")));
    }
    let n = n as usize;
    let mut neighbors: Vec<Vec<u32>> = (0..n as u32)
        .map(|v| {
            let mut ns = ran.neighbors(v).to_vec();
            ns.sort_unstable();
            ns
        })
        .collect();
    let masks: Vec<u64> = neighbors
        .iter()
        .map(|ns| ns.iter().fold(0u64, |m, &v| m | (1 << v)))
        .collect();
    let upper = (buono_upper_bound(delta) as usize).min(n);
    let mut search = ExactSearch {
        neighbors: std::mem::take(&mut neighbors),
        masks: &masks,
        best: Vec::new(),
        upper,
        done: false,
    };
    for start in 0..n as u32 {
        if search.done {
            break;
        }
        let mut path = vec![start];
        search.dfs(&mut path, 1 << start);
    }
    debug_assert!(validate_path(ran, &search.best).is_ok());
    Ok(PathResult {
        length: search.best.len() as u64,
        path: search.best,
        method: PathMethod::Exact,
    })
}

/// [`longest_path_exact_with_cap`] at the default cap.
pub fn longest_path_exact(ran: &RanGraph, delta: &DeltaTree) -> Result<PathResult> {
    longest_path_exact_with_cap(ran, delta, DEFAULT_EXACT_CAP_T)
}

/// Greedy lower-bound witness: route recursively through the two heaviest
/// child triangles of each subdivided face (weight = vertices strictly
/// inside). Always returns a valid simple path; its only contract is
/// validity.
pub fn longest_path_heuristic(ran: &RanGraph, delta: &DeltaTree) -> PathResult {
    let inside = delta.inside_counts();
    let mut path = vec![2u32];
    descend(delta, &inside, 0, 0, 1, &mut path);
    path.push(1);
    debug_assert!(validate_path(ran, &path).is_ok());
    PathResult {
        length: path.len() as u64,
        path,
        method: PathMethod::Heuristic,
    }
}

/// Pushes a walk from `entry` (inclusive) to `exit` (exclusive) using only
/// `entry` and vertices strictly inside the triangle of `node`.
fn descend(delta: &DeltaTree, inside: &[u64], node: u32, entry: u32, exit: u32, out: &mut Vec<u32>) {
    if delta.arena().is_leaf(node) {
        out.push(entry);
        return;
    }
    let children: Vec<u32> = delta.arena().children(node).collect();
    let corners: Vec<[u32; 3]> = children
        .iter()
        .map(|&c| delta.corners(c).expect("valid child"))
        .collect();
    // The subdividing vertex is the newest corner, common to all children.
    let center = corners[0][2];
    let contains = |i: usize, v: u32| corners[i].contains(&v);
    let drop = (0..3)
        .min_by_key(|&i| (inside[children[i] as usize], i))
        .expect("three children");
    let kept: Vec<usize> = (0..3).filter(|&i| i != drop).collect();
    // Exit leg: the kept child holding the exit corner, preferring the one
    // that does not also hold the entry corner; the other kept child then
    // holds the entry corner.
    let exit_leg = *kept
        .iter()
        .find(|&&i| contains(i, exit) && !contains(i, entry))
        .or_else(|| kept.iter().find(|&&i| contains(i, exit)))
        .expect("a kept child contains the exit corner");
    let entry_leg = *kept.iter().find(|&&i| i != exit_leg).expect("two kept");
    debug_assert!(contains(entry_leg, entry));
    descend(delta, inside, children[entry_leg], entry, center, out);
    descend(delta, inside, children[exit_leg], center, exit, out);
}

/// `R(P)`: all Δ-tree nodes whose triangle strictly contains a path
/// vertex. The result is closed under Δ-tree ancestry and sorted.
pub fn trace_triangles(ran: &RanGraph, delta: &DeltaTree, path: &PathResult) -> Result<Vec<u32>> {
    validate_path(ran, &path.path)?;
    let mut marked = vec![false; delta.node_count() as usize];
    for &v in &path.path {
        if let Some(node) = ran.creation_node(v) {
            let mut u = node;
            loop {
                if marked[u as usize] {
                    break;
                }
                marked[u as usize] = true;
                match delta.arena().parent(u) {
                    Some(p) => u = p,
                    None => break,
                }
            }
        }
    }
    Ok(marked
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m)
        .map(|(i, _)| i as u32)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apollonian::grow_ran;
    use crate::rng::Stream;
    use crate::subtree_dp::witness_is_buono;

    /// Unpruned exhaustive DFS, lexicographic order, no bounds.
    fn oracle_longest_path(ran: &RanGraph) -> Vec<u32> {
        let n = ran.vertex_count() as usize;
        assert!(n <= 32);
        let neighbors: Vec<Vec<u32>> = (0..n as u32)
            .map(|v| {
                let mut ns = ran.neighbors(v).to_vec();
                ns.sort_unstable();
                ns
            })
            .collect();
        fn dfs(
            neighbors: &[Vec<u32>],
            path: &mut Vec<u32>,
            visited: u64,
            best: &mut Vec<u32>,
        ) {
            if path.len() > best.len() {
                *best = path.clone();
            }
            let cur = *path.last().unwrap();
            for &next in &neighbors[cur as usize] {
                if visited & (1 << next) == 0 {
                    path.push(next);
                    dfs(neighbors, path, visited | (1 << next), best);
                    path.pop();
                }
            }
        }
        let mut best = Vec::new();
        for start in 0..n as u32 {
            let mut path = vec![start];
            dfs(&neighbors, &mut path, 1 << start, &mut best);
        }
        best
    }

    #[test]
    fn triangle_and_k4() {
        let (ran0, d0) = grow_ran(0, &mut Stream::new(1)).unwrap();
        assert_eq!(longest_path_exact(&ran0, &d0).unwrap().length, 3);
        assert_eq!(longest_path_heuristic(&ran0, &d0).length, 3);
        assert_eq!(buono_upper_bound(&d0), 4);

        let (ran1, d1) = grow_ran(1, &mut Stream::new(2)).unwrap();
        assert_eq!(longest_path_exact(&ran1, &d1).unwrap().length, 4);
        assert_eq!(longest_path_heuristic(&ran1, &d1).length, 4);
        assert_eq!(buono_upper_bound(&d1), 7);
    }

    #[test]
    fn exact_matches_unpruned_oracle() {
        for seed in 0..30u64 {
            let t = seed % 9;
            let (ran, delta) = grow_ran(t, &mut Stream::new(500 + seed)).unwrap();
            let exact = longest_path_exact(&ran, &delta).unwrap();
            let oracle = oracle_longest_path(&ran);
            assert_eq!(exact.length as usize, oracle.len(), "t={t} seed={seed}");
            assert_eq!(exact.path, oracle, "lexicographic tie-break");
        }
    }

    #[test]
    fn heuristic_is_valid_and_dominated() {
        for seed in 0..25u64 {
            let t = seed % 13;
            let (ran, delta) = grow_ran(t, &mut Stream::new(900 + seed)).unwrap();
            let h = longest_path_heuristic(&ran, &delta);
            validate_path(&ran, &h.path).unwrap();
            let e = longest_path_exact(&ran, &delta).unwrap();
            assert!(h.length <= e.length, "t={t} seed={seed}");
            assert!(e.length <= buono_upper_bound(&delta));
            assert!(e.length as f64 >= deterministic_path_lower_bound(t));
        }
    }

    #[test]
    fn exact_rejects_large_instances() {
        let (ran, delta) = grow_ran(13, &mut Stream::new(3)).unwrap();
        assert!(matches!(
            longest_path_exact(&ran, &delta),
            Err(Error::TooLarge(_))
        ));
        assert!(longest_path_exact_with_cap(&ran, &delta, 13).is_ok());
    }

    #[test]
    fn trace_of_outer_triangle_is_empty() {
        let (ran, delta) = grow_ran(0, &mut Stream::new(4)).unwrap();
        let p = longest_path_exact(&ran, &delta).unwrap();
        assert!(trace_triangles(&ran, &delta, &p).unwrap().is_empty());
    }

    #[test]
    fn trace_of_k4_hamiltonian_is_root() {
        let (ran, delta) = grow_ran(1, &mut Stream::new(5)).unwrap();
        let p = longest_path_exact(&ran, &delta).unwrap();
        assert_eq!(p.length, 4);
        assert_eq!(trace_triangles(&ran, &delta, &p).unwrap(), vec![0]);
    }

    #[test]
    fn trace_is_ancestry_closed_and_buono() {
        for seed in 0..20u64 {
            let t = 2 + seed % 9;
            let (ran, delta) = grow_ran(t, &mut Stream::new(1_300 + seed)).unwrap();
            let p = longest_path_exact(&ran, &delta).unwrap();
            let r = trace_triangles(&ran, &delta, &p).unwrap();
            for &node in &r {
                if let Some(parent) = delta.arena().parent(node) {
                    assert!(r.binary_search(&parent).is_ok(), "ancestry closure");
                }
            }
            if !r.is_empty() {
                assert!(witness_is_buono(delta.arena(), &r), "t={t} seed={seed}");
            }
        }
    }

    #[test]
    fn trace_rejects_invalid_paths() {
        let (ran, delta) = grow_ran(2, &mut Stream::new(6)).unwrap();
        let bogus = PathResult {
            length: 2,
            path: vec![0, 0],
            method: PathMethod::Exact,
        };
        assert!(trace_triangles(&ran, &delta, &bogus).is_err());
    }
}
