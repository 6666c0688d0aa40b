//! Triangle detection with shards `A_i x A_j x Q_k`.
//!
//! `A` has `ceil(n^(2/5))` parts and `Q` has `ceil(n^(1/5))`. A shard's node
//! first learns `E(A_i, A_j)`, then the leader searches over the
//! `ceil(n^(2/5))` batches of `Q_k`; each query ships `E(A_i u A_j, batch)`.

use std::ops::Range;

use super::{DetectConfig, Detection};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::instance::Input;
use crate::netsim::{Block, CostLedger, KnowledgeState, Model, RoutingDemand};
use crate::qsearch::{run_search, SearchContext};
use crate::sizing::{ceil_pow, BalancedRanges};

struct Layout {
    n: usize,
    a: BalancedRanges,
    q: BalancedRanges,
    batches: u64,
    /// `(i, j, k)` with `i <= j`, in lexicographic order; shard `r` sits at node `r mod n`.
    shards: Vec<(u64, u64, u64)>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let a = BalancedRanges::new(n as u64, ceil_pow(n as u64, 0.4));
        let q = BalancedRanges::new(n as u64, ceil_pow(n as u64, 0.2));
        let mut shards = Vec::new();
        for i in 0..a.count() {
            for j in i..a.count() {
                for k in 0..q.count() {
                    shards.push((i, j, k));
                }
            }
        }
        Layout {
            n,
            a,
            q,
            batches: ceil_pow(n as u64, 0.4),
            shards,
        }
    }

    fn shards_at(&self, v: NodeId) -> impl Iterator<Item = &(u64, u64, u64)> {
        self.shards.iter().skip(v as usize).step_by(self.n)
    }

    fn batch(&self, k: u64, l: u64) -> Range<NodeId> {
        let part = self.q.range(k);
        let len = part.len() as u64;
        let split = BalancedRanges::new(len, self.batches);
        if l >= split.count() {
            return part.end..part.end;
        }
        let r = split.range(l);
        part.start + r.start..part.start + r.end
    }

    fn max_batch(&self) -> u64 {
        self.q.max_size().div_ceil(self.batches).max(1)
    }

    fn loads(&self, per_shard: u64) -> Vec<u64> {
        (0..self.n as NodeId)
            .map(|v| self.shards_at(v).count() as u64 * per_shard)
            .collect()
    }
}

/// A triangle `x in xs, y in ys, z in zs` with `x != y`, if any.
fn triangle_in(g: &Graph, xs: &Range<NodeId>, ys: &Range<NodeId>, zs: &Range<NodeId>) -> Option<[NodeId; 3]> {
    let within = |v: NodeId, r: &Range<NodeId>| {
        let nb = g.neighbors(v);
        &nb[nb.partition_point(|&w| w < r.start)..nb.partition_point(|&w| w < r.end)]
    };
    for z in zs.clone() {
        let nx = within(z, xs);
        if nx.is_empty() {
            continue;
        }
        let ny = within(z, ys);
        for &x in nx {
            if let Some(&y) = ny.iter().find(|&&y| y != x && g.has_edge(x, y)) {
                return Some([x, y, z]);
            }
        }
    }
    None
}

pub fn detect_triangle_quintic(
    input: Input<'_>,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    let n = input.n();
    if n < 32 {
        return Err(Error::invalid("n", format!("triangle15 needs n >= 32, got {n}")));
    }
    if input.m() == 0 {
        return Ok(Detection::nothing(input.is_cost_only()));
    }
    let layout = Layout::new(n);
    let model = &cfg.model;
    let amax = layout.a.max_size();
    let phase1 = RoutingDemand::balanced_sources(layout.loads(amax * amax));
    model.route_lenzen(ledger, "triangle: learn E(A_i, A_j)", &phase1);
    let query_demand = RoutingDemand::balanced_sources(layout.loads(2 * amax * layout.max_batch()));

    let graph = input.graph();
    let mut know = graph.map(|_| KnowledgeState::new(n));
    if let Some(know) = know.as_mut() {
        for (r, &(i, j, _)) in layout.shards.iter().enumerate() {
            know.learn((r % n) as NodeId, Block::new(layout.a.range(i), layout.a.range(j)));
        }
    }
    let mut witness = None;
    let ctx = SearchContext::new("triangle: search batches of Q_k", Model::Clique, cfg.seed)
        .cost_only(graph.is_none());
    let outcome = run_search(
        layout.batches,
        |l, scratch| {
            model.route_lenzen(scratch, "triangle query: learn E(A_i u A_j, batch)", &query_demand);
            let mut hit = None;
            if let (Some(g), Some(know)) = (graph, know.as_mut()) {
                let mark = know.mark();
                for (r, &(i, j, k)) in layout.shards.iter().enumerate() {
                    let v = (r % n) as NodeId;
                    let batch = layout.batch(k, l);
                    know.learn(v, Block::new(layout.a.range(i), batch.clone()));
                    know.learn(v, Block::new(layout.a.range(j), batch));
                }
                for (r, &(i, j, k)) in layout.shards.iter().enumerate() {
                    let v = (r % n) as NodeId;
                    let (ai, aj, batch) = (layout.a.range(i), layout.a.range(j), layout.batch(k, l));
                    know.require(v, &ai, &aj)?;
                    know.require(v, &ai, &batch)?;
                    know.require(v, &aj, &batch)?;
                    if let Some(t) = triangle_in(g, &ai, &aj, &batch) {
                        hit = Some(t);
                        break;
                    }
                }
                know.rollback(mark);
            }
            model.converge_to_leader(scratch, "triangle query: report", 1);
            if hit.is_some() && witness.is_none() {
                witness = hit;
            }
            Ok(hit.is_some())
        },
        ledger,
        &cfg.params,
        &ctx,
    )?;
    Ok(Detection {
        found: graph.map(|_| outcome.found),
        witness: witness.filter(|_| outcome.found).map(|mut w| {
            w.sort_unstable();
            w.to_vec()
        }),
        queries: outcome.queries_evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, oracle_clique_exists, GenSpec};
    use crate::instance::SyntheticGraph;

    fn run(g: &Graph) -> (Detection, CostLedger) {
        let mut ledger = CostLedger::new();
        let d = detect_triangle_quintic(Input::Graph(g), &DetectConfig::new(g.n()), &mut ledger).unwrap();
        (d, ledger)
    }

    #[test]
    fn shards_fit_in_the_network() {
        for n in [32usize, 100, 1024, 65536] {
            let l = Layout::new(n);
            assert!(l.shards.len() <= n, "n = {n}");
        }
    }

    #[test]
    fn lone_triangle() {
        let g = Graph::from_edges(32, &[(3, 17), (17, 30), (3, 30)]).unwrap();
        let (d, _) = run(&g);
        assert!(d.is_found());
        assert_eq!(d.witness, Some(vec![3, 17, 30]));
    }

    #[test]
    fn star_has_none() {
        let edges: Vec<(NodeId, NodeId)> = (1..64).map(|v| (0, v)).collect();
        let g = Graph::from_edges(64, &edges).unwrap();
        assert_eq!(run(&g).0.found, Some(false));
    }

    #[test]
    fn matches_oracle_on_random_graphs() {
        for (n, prob, seed) in [(512, 0.05, 11), (64, 0.05, 1), (96, 0.02, 4), (40, 0.3, 2)] {
            let g = generate(&GenSpec::gnp(n, prob, seed)).unwrap();
            let (d, _) = run(&g);
            assert_eq!(d.found, Some(oracle_clique_exists(&g, 3).unwrap()), "n={n} seed={seed}");
        }
    }

    #[test]
    fn cost_is_answer_independent_and_matches_cost_only() {
        let with = Graph::from_edges(1024, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let without = Graph::from_edges(1024, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let syn = SyntheticGraph::new(1024, 3).unwrap();
        let (_, a) = run(&with);
        let (_, b) = run(&without);
        let mut c = CostLedger::new();
        detect_triangle_quintic(Input::Synthetic(&syn), &DetectConfig::new(1024), &mut c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
