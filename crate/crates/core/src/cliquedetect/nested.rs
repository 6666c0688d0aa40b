//! `K_{p+1}` and `K_{p+t}` detection on top of `K_p` listing.
//!
//! Every listing owner `v` holds the cliques of its group multisets, spread
//! over `T^v`, the union of its groups. Both algorithms ship each owner the
//! edges between `T^v` and the parts chosen so far and let it scan locally.

use std::ops::Range;

use super::{nested_feasible, DetectConfig, Detection, LevelPartition};
use crate::cliquelist::{list_kp, CliqueInventory, TupleAssignment};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::instance::Input;
use crate::netsim::{Block, CostLedger, KnowledgeState, Model, RoutingDemand};
use crate::qsearch::{run_nested_search, run_search, NestedSearch, SearchContext};

/// `r_i = (1 - 1/p) / 2^(t - i)` for `i = 1..=t`.
pub fn nested_exponents(p: usize, t: usize) -> Vec<f64> {
    let top = 1.0 - 1.0 / p as f64;
    (1..=t).map(|i| top / 2f64.powi((t - i) as i32)).collect()
}

struct Owners {
    /// Groups each owner holds a slot in.
    groups: Vec<Vec<Range<NodeId>>>,
    /// Padded `|T^v|`: slots owned times group size.
    t_words: Vec<u64>,
}

impl Owners {
    fn new(n: usize, p: usize) -> Result<Self> {
        let ta = TupleAssignment::new(n, p)?;
        let multisets = ta.multisets();
        let groups = (0..n as NodeId)
            .map(|v| ta.owned_groups(v, &multisets).into_iter().map(|i| ta.group(i)).collect())
            .collect();
        let t_words = (0..n as NodeId)
            .map(|v| ta.owned_ranks(v).count() as u64 * p as u64 * ta.group_size)
            .collect();
        Ok(Owners { groups, t_words })
    }

    /// Owners receive `(|T^v| + extra) * width` words.
    fn demand(&self, extra: u64, width: u64) -> RoutingDemand {
        RoutingDemand::balanced_sources(
            self.t_words
                .iter()
                .map(|&t| if t == 0 { 0 } else { (t + extra) * width })
                .collect(),
        )
    }

    fn learn(&self, know: &mut KnowledgeState, v: NodeId, extra: &[Range<NodeId>], target: &Range<NodeId>) {
        for r in self.groups[v as usize].iter().chain(extra) {
            know.learn(v, Block::new(r.clone(), target.clone()));
        }
    }
}

fn group_of<'a>(groups: &'a [Range<NodeId>], u: NodeId) -> Result<&'a Range<NodeId>> {
    groups
        .iter()
        .find(|r| r.contains(&u))
        .ok_or_else(|| Error::Invariant(format!("clique member {u} lies outside its owner's groups")))
}

/// Nodes of `part` adjacent to every node of `members`.
fn common_in(g: &Graph, members: &[NodeId], part: &Range<NodeId>) -> Vec<NodeId> {
    let nb = g.neighbors(members[0]);
    nb[nb.partition_point(|&w| w < part.start)..nb.partition_point(|&w| w < part.end)]
        .iter()
        .copied()
        .filter(|&w| members[1..].iter().all(|&u| g.has_edge(u, w)))
        .collect()
}

pub fn detect_plus1(
    input: Input<'_>,
    p: usize,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    let n = input.n();
    if p + 1 > n || input.m() == 0 {
        return Ok(Detection::nothing(input.is_cost_only()));
    }
    let model = &cfg.model;
    let inv = list_kp(input, p, model, ledger, None)?;
    let owners = Owners::new(n, p)?;
    let batches = LevelPartition::new(n, 1, 1.0 - 1.0 / p as f64);
    let demand = owners.demand(0, batches.max_size());
    let graph = input.graph();
    let mut know = graph.map(|_| KnowledgeState::new(n));
    let mut witness = None;
    let ctx = SearchContext::new(format!("K{}: search batches", p + 1), Model::Clique, cfg.seed)
        .cost_only(graph.is_none());
    let outcome = run_search(
        batches.parts(),
        |i, scratch| {
            model.route_lenzen(scratch, "plus1 query: learn E(T^v, Q_i)", &demand);
            let mut hit = None;
            if let (Some(g), Some(know)) = (graph, know.as_mut()) {
                let part = batches.part(i);
                let mark = know.mark();
                'owners: for (v, set) in inv.per_node.iter().enumerate() {
                    let v = v as NodeId;
                    owners.learn(know, v, &[], &part);
                    for k in set.iter() {
                        for &u in k {
                            know.require(v, group_of(&owners.groups[v as usize], u)?, &part)?;
                        }
                        if let Some(&w) = common_in(g, k, &part).first() {
                            let mut c = k.to_vec();
                            c.push(w);
                            hit = Some(c);
                            break 'owners;
                        }
                    }
                }
                know.rollback(mark);
            }
            model.converge_to_leader(scratch, "plus1 query: report", 1);
            let marked = hit.is_some();
            if witness.is_none() {
                witness = hit;
            }
            Ok(marked)
        },
        ledger,
        &cfg.params,
        &ctx,
    )?;
    Ok(finish(graph, outcome.found, witness, outcome.queries_evaluated))
}

pub(super) fn finish(graph: Option<&Graph>, found: bool, witness: Option<Vec<NodeId>>, queries: u64) -> Detection {
    Detection {
        found: graph.map(|_| found),
        witness: witness.filter(|_| found).map(|mut w| {
            w.sort_unstable();
            w
        }),
        queries,
    }
}

#[derive(Clone)]
struct Prefix {
    parts: Vec<Range<NodeId>>,
    mark: usize,
}

struct NestedDetect<'a> {
    graph: Option<&'a Graph>,
    cfg: &'a DetectConfig,
    levels: Vec<LevelPartition>,
    owners: Owners,
    inv: &'a CliqueInventory,
    know: Option<KnowledgeState>,
    base_mark: usize,
    witness: Option<Vec<NodeId>>,
}

impl NestedDetect<'_> {
    /// Ships `E(T^v u earlier parts, part)` to every owner.
    fn route(&mut self, level: usize, earlier: &[Range<NodeId>], part: &Range<NodeId>, ledger: &mut CostLedger) {
        let extra: u64 = self.levels[..level].iter().map(LevelPartition::max_size).sum();
        let demand = self.owners.demand(extra, self.levels[level].max_size());
        self.cfg
            .model
            .route_lenzen(ledger, &format!("nested level {}: learn E(T^v u X_<, X)", level + 1), &demand);
        if let Some(know) = self.know.as_mut() {
            for v in 0..self.inv.per_node.len() as NodeId {
                if !self.inv.per_node[v as usize].is_empty() {
                    self.owners.learn(know, v, earlier, part);
                }
            }
        }
    }

    fn scan(&self, parts: &[Range<NodeId>]) -> Result<Option<Vec<NodeId>>> {
        let (Some(g), Some(know)) = (self.graph, self.know.as_ref()) else {
            return Ok(None);
        };
        for (v, set) in self.inv.per_node.iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let v = v as NodeId;
            let groups = &self.owners.groups[v as usize];
            for (l, part) in parts.iter().enumerate() {
                for r in groups.iter().chain(&parts[..l]) {
                    know.require(v, r, part)?;
                }
            }
            for k in set.iter() {
                let mut c = k.to_vec();
                if grow(g, &mut c, parts) {
                    return Ok(Some(c));
                }
            }
        }
        Ok(None)
    }
}

/// Adds one node from each part, each adjacent to everything chosen so far.
pub(super) fn grow(g: &Graph, c: &mut Vec<NodeId>, parts: &[Range<NodeId>]) -> bool {
    let Some((part, rest)) = parts.split_first() else {
        return true;
    };
    for w in common_in(g, c, part) {
        c.push(w);
        if grow(g, c, rest) {
            return true;
        }
        c.pop();
    }
    false
}

impl NestedSearch for NestedDetect<'_> {
    type State = Prefix;

    fn sizes(&self) -> Vec<u64> {
        self.levels.iter().map(LevelPartition::parts).collect()
    }

    fn root(&mut self) -> Prefix {
        if let Some(know) = self.know.as_mut() {
            know.rollback(self.base_mark);
        }
        Prefix {
            parts: Vec::new(),
            mark: self.base_mark,
        }
    }

    fn setup(&mut self, level: usize, x: u64, parent: &Prefix, ledger: &mut CostLedger) -> Result<Prefix> {
        if let Some(know) = self.know.as_mut() {
            know.rollback(parent.mark);
        }
        let part = self.levels[level].part(x);
        // The deepest level's edges travel inside the checker.
        if level + 1 < self.levels.len() {
            self.route(level, &parent.parts, &part, ledger);
        }
        let mut parts = parent.parts.clone();
        parts.push(part);
        Ok(Prefix {
            parts,
            mark: self.know.as_ref().map_or(0, KnowledgeState::mark),
        })
    }

    fn check(&mut self, state: &Prefix, ledger: &mut CostLedger) -> Result<bool> {
        let last = self.levels.len() - 1;
        let (earlier, part) = state.parts.split_at(last);
        self.route(last, earlier, &part[0], ledger);
        let hit = self.scan(&state.parts)?;
        if let Some(know) = self.know.as_mut() {
            know.rollback(state.mark);
        }
        self.cfg.model.converge_to_leader(ledger, "nested check: report", 1);
        let marked = hit.is_some();
        if self.witness.is_none() {
            self.witness = hit;
        }
        Ok(marked)
    }
}

pub fn detect_nested(
    input: Input<'_>,
    p: usize,
    t: usize,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    if !nested_feasible(p, t) {
        return Err(Error::invalid(
            "t",
            format!("nested detection needs t <= 1 + log2(p - 1); (p, t) = ({p}, {t}) is outside"),
        ));
    }
    let n = input.n();
    if p + t > n || input.m() == 0 {
        return Ok(Detection::nothing(input.is_cost_only()));
    }
    let inv = list_kp(input, p, &cfg.model, ledger, None)?;
    let levels = nested_exponents(p, t)
        .into_iter()
        .enumerate()
        .map(|(i, r)| LevelPartition::new(n, i + 1, r))
        .collect();
    let graph = input.graph();
    let know = graph.map(|_| KnowledgeState::new(n));
    let mut search = NestedDetect {
        graph,
        cfg,
        levels,
        owners: Owners::new(n, p)?,
        inv: &inv,
        base_mark: 0,
        know,
        witness: None,
    };
    if let Some(know) = search.know.as_mut() {
        // Listing left every owner with its slot blocks.
        let ta = TupleAssignment::new(n, p)?;
        for (rank, ms) in ta.multisets().iter().enumerate() {
            for i in 0..p {
                for j in i + 1..p {
                    know.learn(ta.owner(rank as u64), Block::new(ta.group(ms[i]), ta.group(ms[j])));
                }
            }
        }
        search.base_mark = know.mark();
    }
    let ctx = SearchContext::new(format!("K{}: nested search", p + t), Model::Clique, cfg.seed)
        .cost_only(graph.is_none());
    let outcome = run_nested_search(&mut search, ledger, &cfg.params, &ctx)?;
    Ok(finish(graph, outcome.found, search.witness, outcome.queries_evaluated))
}
