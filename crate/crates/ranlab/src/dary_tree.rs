//! Growth and bookkeeping of the random d-ary recursive tree `T_t`.
//!
//! The tree starts as a single root; each step picks a uniformly random
//! leaf and gives it exactly `d` offspring. Nodes live in a flat
//! append-only arena. Because every step appends its `d` children as a
//! consecutive block, a node stores only its parent and the index of its
//! first child; the creation step of a node is a function of its index.

use crate::rng::Stream;
use crate::{Error, Result};
use rand::Rng;
use std::io::Write;

/// Sentinel for "no node".
pub const NO_NODE: u32 = u32::MAX;

/// Indexed rooted tree holding `T_t` (or the Δ-tree of a RAN).
#[derive(Debug, Clone)]
pub struct TreeArena {
    d: u32,
    steps: u64,
    parent: Vec<u32>,
    first_child: Vec<u32>,
    /// Current leaves, in swap-remove order; uniform choice is O(1).
    leaves: Vec<u32>,
}

impl TreeArena {
    /// A tree at time 0: one root, one leaf.
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::param(format!("branching factor d={d}, need d >= 2")));
        }
        Ok(TreeArena {
            d,
            steps: 0,
            parent: vec![NO_NODE],
            first_child: vec![NO_NODE],
            leaves: vec![0],
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Number of growth steps performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn node_count(&self) -> u64 {
        self.parent.len() as u64
    }

    pub fn leaf_count(&self) -> u64 {
        self.leaves.len() as u64
    }

    /// Current leaves in registry order (not index order).
    pub fn leaves(&self) -> &[u32] {
        &self.leaves
    }

    pub fn is_valid(&self, v: u32) -> bool {
        (v as usize) < self.parent.len()
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        match self.parent[v as usize] {
            NO_NODE => None,
            p => Some(p),
        }
    }

    pub fn is_leaf(&self, v: u32) -> bool {
        self.first_child[v as usize] == NO_NODE
    }

    /// Children of `v`: a consecutive index block, empty for leaves.
    pub fn children(&self, v: u32) -> std::ops::Range<u32> {
        match self.first_child[v as usize] {
            NO_NODE => 0..0,
            c => c..c + self.d,
        }
    }

    /// Growth step at which `v` was created; the root has step 0.
    pub fn birth_step(&self, v: u32) -> u64 {
        if v == 0 {
            0
        } else {
            (u64::from(v) - 1) / u64::from(self.d) + 1
        }
    }

    /// Expands the leaf stored at `pos` in the registry; returns
    /// `(expanded leaf, first new child)`. The registry update is
    /// positional (overwrite + push), which callers mirroring a parallel
    /// registry rely on.
    pub fn expand_leaf_at(&mut self, pos: usize) -> Result<(u32, u32)> {
        let leaf = self.leaves[pos];
        let first = self.parent.len() as u64;
        let new_len = first + u64::from(self.d);
        if new_len >= u64::from(NO_NODE) {
            return Err(Error::Capacity(format!(
                "node index space exhausted at {new_len} nodes"
            )));
        }
        let first = first as u32;
        for i in 0..self.d {
            self.parent.push(leaf);
            self.first_child.push(NO_NODE);
            if i == 0 {
                self.leaves[pos] = first;
            } else {
                self.leaves.push(first + i);
            }
        }
        self.first_child[leaf as usize] = first;
        self.steps += 1;
        Ok((leaf, first))
    }

    /// One uniform-leaf growth step.
    pub fn grow_step(&mut self, rng: &mut Stream) -> Result<(u32, u32)> {
        let pos = rng.gen_range(0..self.leaves.len());
        self.expand_leaf_at(pos)
    }

    /// Depth of every node. One pass: parents precede children in index
    /// order.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.parent.len()];
        for v in 1..self.parent.len() {
            depth[v] = depth[self.parent[v] as usize] + 1;
        }
        depth
    }

    /// All nodes at distance `n` from the root, in index order.
    pub fn level_set(&self, n: u32) -> Vec<u32> {
        self.depths()
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == n)
            .map(|(v, _)| v as u32)
            .collect()
    }

    /// Subtree size (`ℵ`) of every node, via one reverse-index pass.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let n = self.parent.len();
        let mut size = vec![1u64; n];
        for v in (1..n).rev() {
            size[self.parent[v] as usize] += size[v];
        }
        size
    }
}

/// Builds `T_t` by `t` uniform-leaf expansions.
pub fn grow_tree(d: u32, t: u64, rng: &mut Stream) -> Result<TreeArena> {
    let mut tree = TreeArena::new(d)?;
    for _ in 0..t {
        tree.grow_step(rng)?;
    }
    Ok(tree)
}

/// Branch statistics of a vertex: `ℵ(ν,t)` counts the vertices `μ` with
/// `ν` on the root-to-`μ` path, and the weight is `W = (ℵ−1)/d`, always
/// an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchStats {
    pub aleph: u64,
    pub weight: u64,
}

/// Branch statistics of a single vertex, by walking its subtree.
pub fn branch_stats(tree: &TreeArena, v: u32) -> Result<BranchStats> {
    if !tree.is_valid(v) {
        return Err(Error::param(format!("node index {v} out of range")));
    }
    let mut aleph = 0u64;
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        aleph += 1;
        for c in tree.children(u) {
            stack.push(c);
        }
    }
    debug_assert_eq!((aleph - 1) % u64::from(tree.d()), 0);
    Ok(BranchStats {
        aleph,
        weight: (aleph - 1) / u64::from(tree.d()),
    })
}

/// Branch statistics for every vertex in one post-order pass.
pub fn branch_stats_all(tree: &TreeArena) -> Vec<BranchStats> {
    tree.subtree_sizes()
        .into_iter()
        .map(|aleph| BranchStats {
            aleph,
            weight: (aleph - 1) / u64::from(tree.d()),
        })
        .collect()
}

/// Writes the newline-delimited `child parent` edge list with the header
/// line `d t seed`.
pub fn write_edge_list<W: Write>(tree: &TreeArena, seed: u64, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", tree.d(), tree.steps(), seed)?;
    for v in 1..tree.node_count() {
        writeln!(w, "{} {}", v, tree.parent(v as u32).expect("non-root"))?;
    }
    Ok(())
}
