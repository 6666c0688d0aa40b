//! `K_p` listing in the Congested Clique by group multisets.
//!
//! Nodes are cut into `s = ceil(n^(1/p))` contiguous groups. Each size-`p`
//! multiset of group indices has one owner, which learns the edges between
//! its slots and lists the cliques with one node per slot.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{CliqueSet, Graph, NodeId};
use crate::instance::Input;
use crate::netsim::{Block, CliqueModel, CostLedger, KnowledgeState, RoutingDemand};
use crate::par;
use crate::sizing::{binomial, iroot_ceil};

/// Per-node lists of known `p`-cliques.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueInventory {
    pub p: usize,
    pub per_node: Vec<CliqueSet>,
}

impl CliqueInventory {
    pub fn empty(n: usize, p: usize) -> Self {
        CliqueInventory {
            p,
            per_node: vec![CliqueSet::new(p); n],
        }
    }

    /// Everything at node 0; handy for feeding extension algorithms by hand.
    pub fn at_leader(n: usize, cliques: CliqueSet) -> Self {
        let mut inv = CliqueInventory::empty(n, cliques.p());
        if n > 0 {
            inv.per_node[0] = cliques;
        }
        inv
    }

    pub fn union(&self) -> CliqueSet {
        CliqueSet::union(self.p, &self.per_node)
    }

    pub fn total_listed(&self) -> usize {
        self.per_node.iter().map(CliqueSet::len).sum()
    }

    /// One line `v: u1 u2 ... up` per listed clique, by node then clique.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (v, set) in self.per_node.iter().enumerate() {
            for c in set.iter() {
                let members: Vec<String> = c.iter().map(u32::to_string).collect();
                writeln!(out, "{v}: {}", members.join(" ")).unwrap();
            }
        }
        out
    }
}

/// Groups and multiset owners for listing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleAssignment {
    pub n: usize,
    pub p: usize,
    /// Number of groups.
    pub s: u64,
    /// Size of every group but possibly the last.
    pub group_size: u64,
    multiset_count: u64,
}

impl TupleAssignment {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid("p", format!("listing needs p >= 2, got {p}")));
        }
        let s = iroot_ceil(n as u64, p as u32).max(1);
        let count = binomial(s + p as u64 - 1, p as u64);
        let multiset_count = u64::try_from(count)
            .map_err(|_| Error::invalid("p", "too many group multisets"))?;
        Ok(TupleAssignment {
            n,
            p,
            s,
            group_size: (n as u64).div_ceil(s),
            multiset_count,
        })
    }

    pub fn group(&self, i: u64) -> Range<NodeId> {
        let lo = (i * self.group_size).min(self.n as u64);
        let hi = ((i + 1) * self.group_size).min(self.n as u64);
        lo as NodeId..hi as NodeId
    }

    pub fn group_of(&self, v: NodeId) -> u64 {
        v as u64 / self.group_size
    }

    pub fn multiset_count(&self) -> u64 {
        self.multiset_count
    }

    /// All multisets in lexicographic order.
    pub fn multisets(&self) -> Vec<Vec<u64>> {
        let mut out = Vec::with_capacity(self.multiset_count as usize);
        let mut cur = vec![0u64; self.p];
        loop {
            out.push(cur.clone());
            let Some(i) = (0..self.p).rev().find(|&i| cur[i] + 1 < self.s) else {
                break;
            };
            let next = cur[i] + 1;
            cur[i..].iter_mut().for_each(|x| *x = next);
        }
        out
    }

    pub fn owner(&self, rank: u64) -> NodeId {
        (rank % self.n as u64) as NodeId
    }

    /// Most multisets owned by a single node.
    pub fn max_owned(&self) -> u64 {
        self.multiset_count.div_ceil(self.n as u64)
    }

    pub fn owned_ranks(&self, v: NodeId) -> impl Iterator<Item = u64> {
        (v as u64..self.multiset_count).step_by(self.n.max(1))
    }

    /// Words an owner receives per multiset: one per slot pair, padded to full groups.
    pub fn words_per_multiset(&self) -> u64 {
        let pairs = (self.p * (self.p - 1) / 2) as u64;
        pairs * self.group_size * self.group_size
    }

    /// Distinct groups a node owns a slot in, ascending.
    pub fn owned_groups(&self, v: NodeId, multisets: &[Vec<u64>]) -> Vec<u64> {
        let mut groups: Vec<u64> = self
            .owned_ranks(v)
            .flat_map(|r| multisets[r as usize].iter().copied())
            .collect();
        groups.sort_unstable();
        groups.dedup();
        groups
    }

    pub fn recv_loads(&self) -> Vec<u64> {
        (0..self.n as NodeId)
            .map(|v| self.owned_ranks(v).count() as u64 * self.words_per_multiset())
            .collect()
    }
}

/// Cliques with one node per slot range, slots in nondecreasing group order.
fn cliques_in_slots(g: &Graph, slots: &[Range<NodeId>], out: &mut Vec<NodeId>) {
    fn rec(g: &Graph, slots: &[Range<NodeId>], chosen: &mut Vec<NodeId>, out: &mut Vec<NodeId>) {
        let j = chosen.len();
        if j == slots.len() {
            out.extend_from_slice(chosen);
            return;
        }
        let range = &slots[j];
        let floor = chosen.last().map_or(range.start, |&u| range.start.max(u + 1));
        if j == 0 {
            for v in floor..range.end {
                chosen.push(v);
                rec(g, slots, chosen, out);
                chosen.pop();
            }
            return;
        }
        let first = g.neighbors(chosen[0]);
        let lo = first.partition_point(|&w| w < floor);
        let hi = first.partition_point(|&w| w < range.end);
        for &w in &first[lo..hi] {
            if chosen[1..].iter().all(|&u| g.has_edge(u, w)) {
                chosen.push(w);
                rec(g, slots, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(g, slots, &mut Vec::with_capacity(slots.len()), out);
}

/// Lists every `p`-clique; each clique ends up at exactly one owner.
pub fn list_kp(
    input: Input<'_>,
    p: usize,
    model: &CliqueModel,
    ledger: &mut CostLedger,
    know: Option<&mut KnowledgeState>,
) -> Result<CliqueInventory> {
    let n = input.n();
    let ta = TupleAssignment::new(n, p)?;
    if input.m() == 0 {
        // Nothing to move and nothing to list.
        return Ok(CliqueInventory::empty(n, p));
    }
    let demand = RoutingDemand::balanced_sources(ta.recv_loads());
    model.route_lenzen(ledger, &format!("list K{p}: learn slot edges"), &demand);
    let Some(g) = input.graph() else {
        return Ok(CliqueInventory::empty(n, p));
    };
    let multisets = ta.multisets();
    if let Some(know) = know {
        for (rank, ms) in multisets.iter().enumerate() {
            let v = ta.owner(rank as u64);
            for i in 0..p {
                for j in i + 1..p {
                    know.learn(v, Block::new(ta.group(ms[i]), ta.group(ms[j])));
                }
            }
        }
    }
    let owners: Vec<NodeId> = (0..n.min(ta.multiset_count() as usize) as NodeId).collect();
    let lists = par::map(owners, |v| {
        let mut flat = Vec::new();
        for rank in ta.owned_ranks(v) {
            let slots: Vec<Range<NodeId>> =
                multisets[rank as usize].iter().map(|&i| ta.group(i)).collect();
            cliques_in_slots(g, &slots, &mut flat);
        }
        (v, flat)
    });
    let mut inv = CliqueInventory::empty(n, p);
    for (v, flat) in lists {
        // One owner may hold several multisets; their cliques interleave.
        let mut rows: Vec<&[NodeId]> = flat.chunks_exact(p).collect();
        rows.sort_unstable();
        inv.per_node[v as usize] = CliqueSet::from_canonical_flat(p, rows.concat());
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, oracle_cliques, GenKind, GenSpec};
    use crate::instance::SyntheticGraph;
    use proptest::prelude::*;

    #[test]
    fn assignment_counts() {
        let a = TupleAssignment::new(16, 2).unwrap();
        assert_eq!((a.s, a.group_size, a.multiset_count()), (4, 4, 10));
        let owned: Vec<usize> = (0..16).map(|v| a.owned_ranks(v).count()).collect();
        assert_eq!(owned[..10], [1; 10]);
        assert_eq!(owned[10..], [0; 6]);
        let b = TupleAssignment::new(8, 3).unwrap();
        assert_eq!((b.s, b.multiset_count()), (2, 4));
        assert_eq!(b.multisets(), vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn owner_is_lexicographic_rank() {
        let a = TupleAssignment::new(16, 2).unwrap();
        let ms = a.multisets();
        // {0,0} {0,1} {0,2} {0,3} {1,1} {1,2} {1,3} ...
        let rank = ms.iter().position(|m| *m == vec![1, 3]).unwrap();
        assert_eq!(rank, 6);
        assert_eq!(a.owner(rank as u64), 6);
    }

    #[test]
    fn complete_graph_edges() {
        let g = generate(&GenSpec::new(GenKind::Complete, 16)).unwrap();
        let inv = list_kp(Input::Graph(&g), 2, &CliqueModel::new(16), &mut CostLedger::new(), None).unwrap();
        assert_eq!(inv.union().len(), 120);
        assert_eq!(inv.total_listed(), 120);
    }

    #[test]
    fn triangles_match_oracle() {
        let g = generate(&GenSpec::gnp(32, 0.3, 5)).unwrap();
        let mut know = KnowledgeState::new(32);
        let inv = list_kp(Input::Graph(&g), 3, &CliqueModel::new(32), &mut CostLedger::new(), Some(&mut know)).unwrap();
        assert_eq!(inv.union(), oracle_cliques(&g, 3).unwrap());
        assert!(know.learned() > 0);
    }

    #[test]
    fn empty_graph_is_free() {
        let g = Graph::empty(40);
        let mut ledger = CostLedger::new();
        let inv = list_kp(Input::Graph(&g), 3, &CliqueModel::new(40), &mut ledger, None).unwrap();
        assert!(inv.union().is_empty());
        assert_eq!(ledger.total(), 0);
    }

    #[test]
    fn dump_format() {
        let g = generate(&GenSpec::new(GenKind::Complete, 4)).unwrap();
        let inv = list_kp(Input::Graph(&g), 3, &CliqueModel::new(4), &mut CostLedger::new(), None).unwrap();
        let dump = inv.dump();
        assert_eq!(dump.lines().count(), 4);
        assert!(dump.lines().all(|l| l.split(": ").nth(1).unwrap().split(' ').count() == 3));
    }

    #[test]
    fn cost_only_charges_like_full() {
        let g = generate(&GenSpec::gnp(1024, 0.01, 3)).unwrap();
        let syn = SyntheticGraph::new(1024, g.m() as u64).unwrap();
        let model = CliqueModel::new(1024);
        let (mut a, mut b) = (CostLedger::new(), CostLedger::new());
        list_kp(Input::Graph(&g), 3, &model, &mut a, None).unwrap();
        list_kp(Input::Synthetic(&syn), 3, &model, &mut b, None).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn listing_is_complete_sound_and_within_bound(
            n in 4usize..48, prob in 0.1f64..0.9, p in 2usize..5, seed in 0u64..1000,
        ) {
            let g = generate(&GenSpec::gnp(n, prob, seed)).unwrap();
            let model = CliqueModel::new(n);
            let mut ledger = CostLedger::new();
            let inv = list_kp(Input::Graph(&g), p, &model, &mut ledger, None).unwrap();
            prop_assert_eq!(inv.total_listed(), inv.union().len(), "a clique was listed twice");
            prop_assert_eq!(inv.union(), oracle_cliques(&g, p).unwrap());
            for set in &inv.per_node {
                for c in set.iter() {
                    prop_assert!(g.is_clique(c));
                }
            }
            let ta = TupleAssignment::new(n, p).unwrap();
            let pairs = (p * (p - 1) / 2) as u64;
            let bound = (ta.max_owned() * pairs * ta.group_size * ta.group_size).div_ceil(n as u64);
            if g.m() > 0 {
                prop_assert_eq!(ledger.total(), bound);
            }
            if p <= 3 {
                let literal = (ta.max_owned() * p as u64 * ta.group_size * ta.group_size).div_ceil(n as u64);
                prop_assert!(ledger.total() <= literal);
            }
        }
    }
}
