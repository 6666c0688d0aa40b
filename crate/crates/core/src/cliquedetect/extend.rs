//! Extending listed `K_p`s to `K_{p+t}` by nested search over broadcast parts.
//!
//! Level `l` picks one part; its setup broadcasts the edges into that part,
//! after which every node can grow its `(p+l-1)`-cliques by one member of
//! the part. The grown sets stay implicit: the checker enumerates them on
//! demand and stops at the first complete one.

use std::ops::Range;

use super::nested::finish;
use super::{DegreeBatching, DetectConfig, Detection, LevelPartition};
use crate::cliquelist::CliqueInventory;
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::instance::Input;
use crate::netsim::{Block, CostLedger, KnowledgeState, Model};
use crate::qsearch::{run_nested_search, NestedSearch, SearchContext};
use crate::sizing::ceil_snap;

struct Level {
    parts: Vec<Range<NodeId>>,
    words: u64,
    label: String,
}

#[derive(Clone)]
struct Prefix {
    parts: Vec<Range<NodeId>>,
    mark: usize,
}

struct ExtendSearch<'a> {
    graph: Option<&'a Graph>,
    cfg: &'a DetectConfig,
    inv: &'a CliqueInventory,
    levels: Vec<Level>,
    know: Option<KnowledgeState>,
    witness: Option<Vec<NodeId>>,
}

impl NestedSearch for ExtendSearch<'_> {
    type State = Prefix;

    fn sizes(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.parts.len() as u64).collect()
    }

    fn root(&mut self) -> Prefix {
        if let Some(know) = self.know.as_mut() {
            know.rollback(0);
        }
        Prefix {
            parts: Vec::new(),
            mark: 0,
        }
    }

    fn setup(&mut self, level: usize, x: u64, parent: &Prefix, ledger: &mut CostLedger) -> Result<Prefix> {
        let lvl = &self.levels[level];
        let part = lvl.parts[x as usize].clone();
        self.cfg.model.broadcast_all(ledger, &lvl.label, lvl.words);
        let mut mark = 0;
        if let Some(know) = self.know.as_mut() {
            know.rollback(parent.mark);
            know.learn_all(Block::new(0..self.inv.per_node.len() as NodeId, part.clone()));
            mark = know.mark();
        }
        let mut parts = parent.parts.clone();
        parts.push(part);
        Ok(Prefix { parts, mark })
    }

    fn check(&mut self, state: &Prefix, ledger: &mut CostLedger) -> Result<bool> {
        let mut hit = None;
        if let (Some(g), Some(know)) = (self.graph, self.know.as_ref()) {
            let n = g.n() as NodeId;
            'nodes: for (u, set) in self.inv.per_node.iter().enumerate() {
                if set.is_empty() {
                    continue;
                }
                for part in &state.parts {
                    know.require(u as NodeId, &(0..n), part)?;
                }
                for k in set.iter() {
                    let mut c = k.to_vec();
                    if super::nested::grow(g, &mut c, &state.parts) {
                        hit = Some(c);
                        break 'nodes;
                    }
                }
            }
        }
        self.cfg.model.converge_to_leader(ledger, "extend check: report", 1);
        let marked = hit.is_some();
        if self.witness.is_none() {
            self.witness = hit;
        }
        Ok(marked)
    }
}

fn run(input: Input<'_>, inv: &CliqueInventory, t: usize, levels: Vec<Level>, cfg: &DetectConfig,
       ledger: &mut CostLedger, phase: String) -> Result<Detection> {
    let graph = input.graph();
    let mut search = ExtendSearch {
        graph,
        cfg,
        inv,
        levels,
        know: graph.map(|g| KnowledgeState::new(g.n())),
        witness: None,
    };
    debug_assert_eq!(search.levels.len(), t);
    let ctx = SearchContext::new(phase, Model::Clique, cfg.seed).cost_only(graph.is_none());
    let outcome = run_nested_search(&mut search, ledger, &cfg.params, &ctx)?;
    Ok(finish(graph, outcome.found, search.witness, outcome.queries_evaluated))
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        return Err(crate::error::Error::invalid("t", "extension needs t >= 1"));
    }
    Ok(())
}

/// Level `l` of `t` uses `ceil(n^(1/2^(t-l)))` parts; each setup broadcasts
/// adjacency rows over the chosen part.
pub fn extend_blackbox(
    input: Input<'_>,
    inv: &CliqueInventory,
    t: usize,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    check_t(t)?;
    let n = input.n();
    let levels = (1..=t)
        .map(|l| {
            let lp = LevelPartition::new(n, l, 0.5f64.powi((t - l) as i32));
            Level {
                parts: (0..lp.parts()).map(|i| lp.part(i)).collect(),
                words: cfg.model.adjacency_words(lp.max_size()),
                label: format!("blackbox level {l}: broadcast adjacency over part"),
            }
        })
        .collect();
    run(input, inv, t, levels, cfg, ledger, format!("K{}+{t}: blackbox search", inv.p))
}

/// Degree batches instead of equal parts: `ceil(mu^(1/2^(t-l)))` batches at
/// the outer levels and batches of degree sum about `n` at the innermost.
pub fn extend_sparse(
    input: Input<'_>,
    inv: &CliqueInventory,
    t: usize,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    check_t(t)?;
    let n = input.n();
    let m = input.m();
    if m == 0 {
        return Ok(Detection::nothing(input.is_cost_only()));
    }
    let degrees = input.degrees();
    cfg.model.broadcast_all(ledger, "sparse: broadcast degrees", 1);
    let mu = m as f64 / n as f64;
    let levels = (1..=t)
        .map(|l| {
            let target = if l == t {
                n as u64
            } else {
                let x = ceil_snap(mu.max(1.0).powf(0.5f64.powi((t - l) as i32))).max(1);
                (2 * m).div_ceil(x)
            };
            let batching = DegreeBatching::greedy(&degrees, target);
            Level {
                words: batching.max_sum().div_ceil(n as u64),
                parts: batching.batches,
                label: format!("sparse level {l}: broadcast edges at batch"),
            }
        })
        .collect();
    run(input, inv, t, levels, cfg, ledger, format!("K{}+{t}: sparse search", inv.p))
}
