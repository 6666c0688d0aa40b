//! Round accounting for the Congested Clique and CONGEST models.

use std::fmt;
use std::io::Write;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Bits per message word: `ceil(log2(max(n, 2)))`.
pub fn word_capacity(n: usize) -> u64 {
    let n = n.max(2) as u64;
    64 - (n - 1).leading_zeros() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    Clique,
    Congest,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Clique => "clique",
            Model::Congest => "congest",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Route,
    Broadcast,
    Converge,
    Quantum,
    Local,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Route => "route",
            Kind::Broadcast => "broadcast",
            Kind::Converge => "converge",
            Kind::Quantum => "quantum",
            Kind::Local => "local",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub phase: String,
    pub model: Model,
    pub kind: Kind,
    pub rounds: u64,
}

/// Append-only list of charged phases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    entries: Vec<Entry>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, phase: impl Into<String>, model: Model, kind: Kind, rounds: u64) {
        debug_assert!(kind != Kind::Local || rounds == 0, "local work is free");
        self.entries.push(Entry {
            phase: phase.into(),
            model,
            kind,
            rounds,
        });
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.rounds).sum()
    }

    pub fn total_of(&self, kind: Kind) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.rounds)
            .sum()
    }

    pub fn append(&mut self, other: CostLedger) {
        self.entries.extend(other.entries);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "phase,model,kind,rounds")?;
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", csv_field(&e.phase), e.model, e.kind, e.rounds)?;
        }
        writeln!(out, "TOTAL,,,{}", self.total())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ledger csv is utf-8")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-node word counts for one clique routing phase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutingDemand {
    pub send_words: Vec<u64>,
    pub recv_words: Vec<u64>,
}

impl RoutingDemand {
    pub fn empty(n: usize) -> Self {
        RoutingDemand {
            send_words: vec![0; n],
            recv_words: vec![0; n],
        }
    }

    /// Receive loads as given; the same total is sourced evenly by all nodes.
    pub fn balanced_sources(recv_words: Vec<u64>) -> Self {
        let n = recv_words.len() as u64;
        let total: u64 = recv_words.iter().sum();
        let send_words = (0..n)
            .map(|v| total / n.max(1) + u64::from(v < total % n.max(1)))
            .collect();
        RoutingDemand {
            send_words,
            recv_words,
        }
    }

    pub fn total_sent(&self) -> u64 {
        self.send_words.iter().sum()
    }

    pub fn total_received(&self) -> u64 {
        self.recv_words.iter().sum()
    }
}

/// Rounds for a demand under Lenzen routing with constant 1.
pub fn lenzen_rounds(n: usize, demand: &RoutingDemand) -> u64 {
    let n = n.max(1) as u64;
    demand
        .send_words
        .iter()
        .chain(&demand.recv_words)
        .map(|&w| w.div_ceil(n))
        .max()
        .unwrap_or(0)
}

/// Rectangle of node-pair slots `rows x cols`, read without orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub rows: Range<NodeId>,
    pub cols: Range<NodeId>,
}

impl Block {
    pub fn new(rows: Range<NodeId>, cols: Range<NodeId>) -> Self {
        Block { rows, cols }
    }

    fn contains_pair(&self, a: NodeId, b: NodeId) -> bool {
        (self.rows.contains(&a) && self.cols.contains(&b))
            || (self.rows.contains(&b) && self.cols.contains(&a))
    }

    fn covers(&self, rows: &Range<NodeId>, cols: &Range<NodeId>) -> bool {
        let within = |inner: &Range<NodeId>, outer: &Range<NodeId>| {
            outer.start <= inner.start && inner.end <= outer.end
        };
        (within(rows, &self.rows) && within(cols, &self.cols))
            || (within(rows, &self.cols) && within(cols, &self.rows))
    }
}

/// Which pair slots each node has learned.
///
/// Every node implicitly knows its own incident slots. Knowledge learned
/// inside a query lives above a mark and is dropped with `rollback`; the
/// part below the oldest open mark only grows.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeState {
    per_node: Vec<Vec<Block>>,
    global: Vec<Block>,
    journal: Vec<Option<NodeId>>,
}

impl KnowledgeState {
    pub fn new(n: usize) -> Self {
        KnowledgeState {
            per_node: vec![Vec::new(); n],
            global: Vec::new(),
            journal: Vec::new(),
        }
    }

    pub fn learn(&mut self, v: NodeId, block: Block) {
        self.per_node[v as usize].push(block);
        self.journal.push(Some(v));
    }

    /// Every node learns `block`, as after a broadcast.
    pub fn learn_all(&mut self, block: Block) {
        self.global.push(block);
        self.journal.push(None);
    }

    pub fn learned(&self) -> usize {
        self.journal.len()
    }

    pub fn mark(&self) -> usize {
        self.journal.len()
    }

    pub fn rollback(&mut self, mark: usize) {
        while self.journal.len() > mark {
            match self.journal.pop().unwrap() {
                Some(v) => {
                    self.per_node[v as usize].pop();
                }
                None => {
                    self.global.pop();
                }
            }
        }
    }

    pub fn knows(&self, v: NodeId, a: NodeId, b: NodeId) -> bool {
        a == v
            || b == v
            || self.global.iter().any(|blk| blk.contains_pair(a, b))
            || self.per_node[v as usize].iter().any(|blk| blk.contains_pair(a, b))
    }

    pub fn covers(&self, v: NodeId, rows: &Range<NodeId>, cols: &Range<NodeId>) -> bool {
        let own = v..v + 1;
        rows.is_empty()
            || cols.is_empty()
            || *rows == own
            || *cols == own
            || self.global.iter().any(|blk| blk.covers(rows, cols))
            || self.per_node[v as usize].iter().any(|blk| blk.covers(rows, cols))
    }

    /// Fails unless `v` may read every slot of `rows x cols`.
    pub fn require(&self, v: NodeId, rows: &Range<NodeId>, cols: &Range<NodeId>) -> Result<()> {
        if self.covers(v, rows, cols) {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "node {v} reads slots {rows:?} x {cols:?} it never received"
            )))
        }
    }
}

/// The Congested Clique on `n` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliqueModel {
    pub n: usize,
    pub capacity: u64,
    /// Pack `capacity` adjacency bits into each broadcast word.
    pub packing: bool,
}

impl CliqueModel {
    pub fn new(n: usize) -> Self {
        CliqueModel {
            n,
            capacity: word_capacity(n),
            packing: true,
        }
    }

    pub fn with_packing(mut self, packing: bool) -> Self {
        self.packing = packing;
        self
    }

    pub fn route_lenzen(&self, ledger: &mut CostLedger, phase: &str, demand: &RoutingDemand) -> u64 {
        let rounds = lenzen_rounds(self.n, demand);
        ledger.charge(phase, Model::Clique, Kind::Route, rounds);
        rounds
    }

    pub fn broadcast_all(&self, ledger: &mut CostLedger, phase: &str, words_per_node: u64) -> u64 {
        ledger.charge(phase, Model::Clique, Kind::Broadcast, words_per_node);
        words_per_node
    }

    /// Words needed to broadcast an adjacency row over `k` target nodes.
    pub fn adjacency_words(&self, k: u64) -> u64 {
        if self.packing {
            k.div_ceil(self.capacity)
        } else {
            k
        }
    }

    pub fn broadcast_adjacency(&self, ledger: &mut CostLedger, phase: &str, k: u64) -> u64 {
        self.broadcast_all(ledger, phase, self.adjacency_words(k))
    }

    pub fn converge_to_leader(&self, ledger: &mut CostLedger, phase: &str, bits_per_node: u64) -> u64 {
        let rounds = bits_per_node.div_ceil(self.capacity);
        ledger.charge(phase, Model::Clique, Kind::Converge, rounds);
        rounds
    }
}

/// One word on one directed edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    pub from: NodeId,
    pub to: NodeId,
    pub word: u64,
}

/// A CONGEST network whose leader is node 0.
#[derive(Clone, Debug)]
pub struct CongestNet<'g> {
    graph: Option<&'g Graph>,
    n: usize,
    capacity: u64,
    eccentricity: u64,
}

impl<'g> CongestNet<'g> {
    /// Fails when node 0 cannot reach every node.
    pub fn new(graph: &'g Graph) -> Result<Self> {
        let n = graph.n();
        let eccentricity = if n == 0 {
            0
        } else {
            let dist = graph.bfs_distances(0);
            if let Some(v) = dist.iter().position(|&d| d == u32::MAX) {
                return Err(Error::Disconnected {
                    unreachable: v as u32,
                });
            }
            *dist.iter().max().unwrap() as u64
        };
        Ok(CongestNet {
            graph: Some(graph),
            n,
            capacity: word_capacity(n),
            eccentricity,
        })
    }

    /// A network known only by size and leader eccentricity.
    pub fn synthetic(n: usize, eccentricity: u64) -> Self {
        CongestNet {
            graph: None,
            n,
            capacity: word_capacity(n),
            eccentricity,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> Option<&'g Graph> {
        self.graph
    }

    pub fn eccentricity(&self) -> u64 {
        self.eccentricity
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Rounds to aggregate `bits_per_node` bits at the leader up a BFS tree.
    pub fn converge_rounds(&self, bits_per_node: u64) -> u64 {
        self.eccentricity * bits_per_node.div_ceil(self.capacity)
    }

    pub fn converge_to_leader(&self, ledger: &mut CostLedger, phase: &str, bits_per_node: u64) -> u64 {
        let rounds = self.converge_rounds(bits_per_node);
        ledger.charge(phase, Model::Congest, Kind::Converge, rounds);
        rounds
    }

    /// Validates and delivers one round of messages without charging it.
    /// Returned messages are sorted by receiver, then sender.
    pub fn deliver(&self, mut outbox: Vec<Message>) -> Result<Vec<Message>> {
        let graph = self
            .graph
            .ok_or_else(|| Error::Protocol("cannot send on a synthetic network".into()))?;
        for msg in &outbox {
            if !graph.has_edge(msg.from, msg.to) {
                return Err(Error::Protocol(format!(
                    "{} -> {} is not an edge",
                    msg.from, msg.to
                )));
            }
        }
        outbox.sort_unstable_by_key(|m| (m.from, m.to));
        if let Some(w) = outbox
            .windows(2)
            .find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to))
        {
            return Err(Error::Protocol(format!(
                "two words on edge {} -> {} in one round",
                w[0].from, w[0].to
            )));
        }
        outbox.sort_unstable_by_key(|m| (m.to, m.from));
        Ok(outbox)
    }

    /// One synchronous round: at most one word per directed edge. Charges 1 round.
    pub fn congest_step(
        &self,
        ledger: &mut CostLedger,
        phase: &str,
        outbox: Vec<Message>,
    ) -> Result<Vec<Message>> {
        let inbox = self.deliver(outbox)?;
        ledger.charge(phase, Model::Congest, Kind::Route, 1);
        Ok(inbox)
    }
}
