//! Simple undirected graphs with dense node ids, plus the edge-list file format,
//! deterministic generators and brute-force oracles.

mod generate;
mod io;
mod oracle;

use std::collections::VecDeque;
use std::fmt;

pub use generate::{generate, GenKind, GenSpec};
pub use io::{load_graph, parse_edge_list, write_edge_list};
pub use oracle::{
    oracle_clique_exists, oracle_cliques, oracle_has_cycle, oracle_has_extension,
    ORACLE_WORK_CAP,
};

use crate::error::{Error, Result};

pub type NodeId = u32;

/// Dense adjacency rows are kept for graphs up to this many nodes.
const DENSE_LIMIT: usize = 8192;

/// An immutable simple undirected graph on nodes `0..n`.
///
/// Neighbor lists are sorted. Graphs up to a few thousand nodes also carry a
/// bit matrix so that `has_edge` is a single word probe.
#[derive(Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    bits: Option<BitRows>,
}

#[derive(Clone)]
struct BitRows {
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitRows {
    fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        BitRows {
            words_per_row,
            words: vec![0; words_per_row * n],
        }
    }

    fn set(&mut self, u: usize, v: usize) {
        self.words[u * self.words_per_row + v / 64] |= 1 << (v % 64);
    }

    fn get(&self, u: usize, v: usize) -> bool {
        self.words[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.words[u * self.words_per_row..(u + 1) * self.words_per_row]
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range ids and duplicates.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(
                    "edges",
                    format!("edge #{i} ({u},{v}) has a node id >= n = {n}"),
                ));
            }
            if u == v {
                return Err(Error::invalid("edges", format!("edge #{i} is a self-loop at {u}")));
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(
                "edges",
                format!("duplicate edge ({},{})", w[0].0, w[0].1),
            ));
        }
        Ok(Self::from_sorted_unique(n, &pairs))
    }

    /// `pairs` must be sorted, unique, with `u < v < n`.
    pub(crate) fn from_sorted_unique(n: usize, pairs: &[(NodeId, NodeId)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0; offsets[n]];
        for &(u, v) in pairs {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        let bits = (n <= DENSE_LIMIT).then(|| {
            let mut rows = BitRows::new(n);
            for &(u, v) in pairs {
                rows.set(u as usize, v as usize);
                rows.set(v as usize, u as usize);
            }
            rows
        });
        Graph {
            n,
            offsets,
            neighbors,
            bits,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unique(n, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn degrees(&self) -> Vec<u64> {
        (0..self.n as NodeId).map(|v| self.degree(v) as u64).collect()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        if u == v {
            return false;
        }
        match &self.bits {
            Some(rows) => rows.get(u as usize, v as usize),
            None => self.neighbors(u).binary_search(&v).is_ok(),
        }
    }

    /// Position of the directed edge `u -> v` in the CSR layout, if present.
    pub fn directed_edge_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.neighbors(u)
            .binary_search(&v)
            .ok()
            .map(|i| self.offsets[u as usize] + i)
    }

    pub fn directed_edge_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Dense adjacency row of `v`, when the graph is small enough to keep one.
    pub fn bit_row(&self, v: NodeId) -> Option<&[u64]> {
        self.bits.as_ref().map(|rows| rows.row(v as usize))
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.n as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// True when every listed node pair is adjacent.
    pub fn is_clique(&self, nodes: &[NodeId]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &u)| nodes[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// True when `nodes` lists a simple cycle `nodes[0] - nodes[1] - ... - nodes[0]`.
    pub fn is_simple_cycle(&self, nodes: &[NodeId]) -> bool {
        let len = nodes.len();
        if len < 3 {
            return false;
        }
        let mut seen = nodes.to_vec();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
        (0..len).all(|i| self.has_edge(nodes[i], nodes[(i + 1) % len]))
    }

    /// Hop distances from `src`; unreachable nodes get `u32::MAX`.
    pub fn bfs_distances(&self, src: NodeId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize] + 1;
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut label = vec![usize::MAX; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![s as NodeId];
            label[s] = id;
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for &w in self.neighbors(u) {
                    if label[w as usize] == usize::MAX {
                        label[w as usize] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    /// Subgraph induced by the sorted node list `nodes`, relabelled to `0..nodes.len()`.
    pub fn induced(&self, nodes: &[NodeId]) -> Graph {
        let mut index = vec![u32::MAX; self.n];
        for (i, &v) in nodes.iter().enumerate() {
            index[v as usize] = i as u32;
        }
        let mut pairs = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            for &w in self.neighbors(v) {
                let j = index[w as usize];
                if j != u32::MAX && j > i as u32 {
                    pairs.push((i as u32, j));
                }
            }
        }
        pairs.sort_unstable();
        Graph::from_sorted_unique(nodes.len(), &pairs)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("m", &self.m())
            .finish()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.offsets == other.offsets && self.neighbors == other.neighbors
    }
}

impl Eq for Graph {}

/// A set of `p`-node subsets, each stored ascending, kept in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CliqueSet {
    p: usize,
    flat: Vec<NodeId>,
}

impl CliqueSet {
    pub fn new(p: usize) -> Self {
        CliqueSet { p, flat: Vec::new() }
    }

    /// Normalizes arbitrary member order and removes duplicate members.
    pub fn from_members<I, M>(p: usize, members: I) -> Self
    where
        I: IntoIterator<Item = M>,
        M: AsRef<[NodeId]>,
    {
        let mut rows: Vec<Vec<NodeId>> = members
            .into_iter()
            .map(|m| {
                let mut row = m.as_ref().to_vec();
                assert_eq!(row.len(), p, "clique member has wrong size");
                row.sort_unstable();
                row
            })
            .collect();
        rows.sort_unstable();
        rows.dedup();
        CliqueSet {
            p,
            flat: rows.concat(),
        }
    }

    /// `flat` must already be canonical (ascending members, lexicographic, unique).
    pub(crate) fn from_canonical_flat(p: usize, flat: Vec<NodeId>) -> Self {
        debug_assert!(p == 0 || flat.len() % p == 0);
        CliqueSet { p, flat }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        if self.p == 0 {
            0
        } else {
            self.flat.len() / self.p
        }
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[NodeId]> + '_ {
        self.flat.chunks_exact(self.p.max(1))
    }

    pub fn contains(&self, member: &[NodeId]) -> bool {
        let mut key = member.to_vec();
        key.sort_unstable();
        let len = self.len();
        let (mut lo, mut hi) = (0, len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let row = &self.flat[mid * self.p..(mid + 1) * self.p];
            match row.cmp(&key[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn union<'a, I: IntoIterator<Item = &'a CliqueSet>>(p: usize, sets: I) -> CliqueSet {
        CliqueSet::from_members(p, sets.into_iter().flat_map(|s| s.iter()))
    }
}
