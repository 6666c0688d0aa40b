//! Colour-coded BFS.
//!
//! In one repetition every active node draws a colour in `0..l`. Colour-0
//! sources push their id along two colour chains (`1, 2, ..` and
//! `l-1, l-2, ..`); a node that sees one id arrive on both chains has found an
//! `l`-cycle, because the chain colours force distinct nodes.
//!
//! Repetitions are simulated in batches. Colours are revealed lazily: when
//! the protocol asks whether `c(v) = c` and the answer is still open, the
//! batch splits binomially between the two answers and each part is replayed
//! from scratch. Only distinct colour histories are ever run.

use std::collections::HashMap;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::netsim::{CongestNet, CostLedger, Kind, Message, Model};
use crate::seed::{rng_for, stage, Rng};

/// Largest cycle length whose single-repetition rate is found by enumeration.
pub const ENUMERATED_MAX_LEN: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorBfsConfig {
    pub cycle_len: usize,
    pub active: Vec<bool>,
    /// Sorted, each active.
    pub sources: Vec<NodeId>,
    pub heights: Vec<u32>,
    pub congestion_bound: u64,
    pub repetitions: u64,
}

impl ColorBfsConfig {
    /// All nodes active, all heights 0.
    pub fn new(n: usize, cycle_len: usize, mut sources: Vec<NodeId>, congestion_bound: u64, repetitions: u64) -> Self {
        sources.sort_unstable();
        sources.dedup();
        ColorBfsConfig {
            cycle_len,
            active: vec![true; n],
            sources,
            heights: vec![0; n],
            congestion_bound,
            repetitions,
        }
    }

    pub fn with_active(mut self, active: Vec<bool>) -> Self {
        self.active = active;
        self
    }

    pub fn with_heights(mut self, heights: Vec<u32>) -> Self {
        self.heights = heights;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(4..=16).contains(&self.cycle_len) {
            return Err(Error::invalid("ell", format!("colour BFS handles cycle lengths 4..=16, got {}", self.cycle_len)));
        }
        if self.active.len() != n || self.heights.len() != n {
            return Err(Error::invalid("active", format!("expected {n} entries")));
        }
        if self.congestion_bound == 0 {
            return Err(Error::invalid("congestion_bound", "must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        if let Some(&s) = self.sources.iter().find(|&&s| s as usize >= n || !self.active[s as usize]) {
            return Err(Error::invalid("sources", format!("source {s} is not an active node")));
        }
        Ok(())
    }
}

/// Rounds of one repetition: the source step, `floor(l/2) - 1` forwarding
/// phases of `M` steps, and for odd `l` one more `M`-step exchange.
pub fn rounds_per_repetition(cycle_len: usize, congestion_bound: u64) -> u64 {
    let half = (cycle_len / 2) as u64;
    let phases = if cycle_len % 2 == 0 { half - 1 } else { half };
    1 + phases * congestion_bound
}

/// Charges a colour BFS: all repetitions, then one bit to the leader.
pub fn charge_color_bfs(net: &CongestNet<'_>, cycle_len: usize, congestion_bound: u64, repetitions: u64, ledger: &mut CostLedger) -> u64 {
    let rounds = repetitions * rounds_per_repetition(cycle_len, congestion_bound);
    ledger.charge("colour bfs: repetitions", Model::Congest, Kind::Route, rounds);
    rounds + net.converge_to_leader(ledger, "colour bfs: report", 1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorBfsOutcome {
    pub found: bool,
    /// The detected cycle, in order, starting at its colour-0 source.
    pub witness: Option<Vec<NodeId>>,
    /// Some simulated repetition had a node holding more than `M` ids.
    pub truncated: bool,
    /// Largest number of source ids a node may have to forward.
    pub max_congestion: u64,
    /// Distinct colour histories replayed.
    pub histories: u64,
}

/// Runs the colour BFS on a real network and charges it.
pub fn color_bfs(net: &CongestNet<'_>, cfg: &ColorBfsConfig, seed: u64, ledger: &mut CostLedger) -> Result<ColorBfsOutcome> {
    let g = net
        .graph()
        .ok_or_else(|| Error::Protocol("colour BFS needs a materialized network".into()))?;
    cfg.validate(g.n())?;
    let mut out = ColorBfsOutcome {
        max_congestion: max_congestion(g, cfg),
        ..ColorBfsOutcome::default()
    };
    for cluster in clusters(g, cfg) {
        let proto = Protocol { net, g, cfg, sources: &cluster };
        let mut rng = rng_for(seed, stage::COLOR_QUERY, cluster[0] as u64);
        let found = explore(&proto, cfg.repetitions, &mut rng, &mut out)?;
        if found.is_some() {
            out.found = true;
            out.witness = found;
            break;
        }
    }
    charge_color_bfs(net, cfg.cycle_len, cfg.congestion_bound, cfg.repetitions, ledger);
    Ok(out)
}

/// One repetition under a fixed colouring. Returns the detected cycle.
pub fn run_with_colors(net: &CongestNet<'_>, cfg: &ColorBfsConfig, colors: &[u8]) -> Result<Option<Vec<NodeId>>> {
    let g = net
        .graph()
        .ok_or_else(|| Error::Protocol("colour BFS needs a materialized network".into()))?;
    cfg.validate(g.n())?;
    let proto = Protocol { net, g, cfg, sources: &cfg.sources };
    match proto.run_once(&mut Fixed(colors)) {
        Ok(rep) => Ok(rep.cycle),
        Err(Halt::Fail(e)) => Err(e),
        Err(Halt::Ask { .. }) => unreachable!("fixed colours never leave a question open"),
    }
}

/// Probability that one single-source repetition with `M = 1` detects an
/// isolated `l`-cycle through its source. Enumerated for small `l`, and
/// `2 / l^l` (two orientations) beyond.
pub fn single_repetition_rate(cycle_len: usize) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    if cycle_len > ENUMERATED_MAX_LEN {
        return 2.0 / (cycle_len as f64).powi(cycle_len as i32);
    }
    TABLE.get_or_init(|| (0..=ENUMERATED_MAX_LEN).map(enumerate_rate).collect())[cycle_len]
}

fn enumerate_rate(l: usize) -> f64 {
    if l < 4 {
        return 0.0;
    }
    let edges: Vec<(NodeId, NodeId)> = (0..l as NodeId).map(|v| (v, (v + 1) % l as NodeId)).collect();
    let g = Graph::from_edges(l, &edges).expect("cycle graph");
    let net = CongestNet::new(&g).expect("connected");
    let cfg = ColorBfsConfig::new(l, l, vec![0], 1, 1);
    let proto = Protocol { net: &net, g: &g, cfg: &cfg, sources: &cfg.sources };
    // Colourings with c(source) != 0 never detect.
    let mut colors = vec![0u8; l];
    let mut hits = 0u64;
    loop {
        if matches!(proto.run_once(&mut Fixed(&colors)), Ok(Rep { cycle: Some(_), .. })) {
            hits += 1;
        }
        let mut i = 1;
        while i < l && colors[i] as usize == l - 1 {
            colors[i] = 0;
            i += 1;
        }
        if i == l {
            break;
        }
        colors[i] += 1;
    }
    hits as f64 / (l as f64).powi(l as i32)
}

/// `ceil(ln(1/eps) / p)`: enough repetitions that a cycle detected with
/// probability `p` per repetition is missed with probability at most `eps`.
pub fn repetitions_for(cycle_len: usize, eps: f64) -> u64 {
    let p = single_repetition_rate(cycle_len);
    ((1.0 / eps).ln() / p).ceil().max(1.0) as u64
}

/// Nodes a source's id can reach: active paths of at most `floor(l/2)` hops
/// whose first hop does not climb.
fn ball(g: &Graph, cfg: &ColorBfsConfig, s: NodeId) -> Vec<NodeId> {
    let radius = cfg.cycle_len / 2;
    let mut seen = vec![s];
    let mut frontier: Vec<NodeId> = g
        .neighbors(s)
        .iter()
        .copied()
        .filter(|&w| cfg.active[w as usize] && cfg.heights[w as usize] <= cfg.heights[s as usize])
        .collect();
    seen.extend(&frontier);
    for _ in 1..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in g.neighbors(v) {
                if cfg.active[w as usize] && !seen.contains(&w) && !next.contains(&w) {
                    next.push(w);
                }
            }
        }
        seen.extend(&next);
        frontier = next;
    }
    seen
}

/// Sources grouped so that different groups have disjoint balls. Groups share
/// no node, colour or message, so their repetitions are independent.
fn clusters(g: &Graph, cfg: &ColorBfsConfig) -> Vec<Vec<NodeId>> {
    let k = cfg.sources.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: HashMap<NodeId, usize> = HashMap::new();
    for (i, &s) in cfg.sources.iter().enumerate() {
        for v in ball(g, cfg, s) {
            if let Some(&j) = owner.get(&v) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            } else {
                owner.insert(v, i);
            }
        }
    }
    let mut groups: Vec<Vec<NodeId>> = Vec::new();
    let mut index: HashMap<usize, usize> = HashMap::new();
    for (i, &s) in cfg.sources.iter().enumerate() {
        let root = find(&mut parent, i);
        let at = *index.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[at].push(s);
    }
    groups
}

/// Sources that reach each node by an active path of forwarding length.
fn max_congestion(g: &Graph, cfg: &ColorBfsConfig) -> u64 {
    let half = cfg.cycle_len / 2;
    let depth = if cfg.cycle_len % 2 == 0 { half - 1 } else { half };
    let mut count: HashMap<NodeId, u64> = HashMap::new();
    for &s in &cfg.sources {
        let mut seen = vec![s];
        let mut frontier = vec![s];
        let mut reached = Vec::new();
        for hop in 0..depth {
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in g.neighbors(v) {
                    let climbs = hop == 0 && cfg.heights[w as usize] > cfg.heights[s as usize];
                    if cfg.active[w as usize] && !climbs && !seen.contains(&w) {
                        seen.push(w);
                        next.push(w);
                    }
                }
            }
            reached.extend(&next);
            frontier = next;
        }
        for v in reached {
            *count.entry(v).or_default() += 1;
        }
    }
    count.into_values().max().unwrap_or(0)
}

enum Halt {
    /// The protocol needs `c(v) = c` and the answer is open with probability `p`.
    Ask { p: f64 },
    Fail(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Fail(e)
    }
}

trait Colors {
    fn is(&mut self, v: NodeId, c: u8) -> Result<bool, Halt>;
}

struct Fixed<'a>(&'a [u8]);

impl Colors for Fixed<'_> {
    fn is(&mut self, v: NodeId, c: u8) -> Result<bool, Halt> {
        Ok(self.0[v as usize] == c)
    }
}

/// Answers from a recorded history; each node keeps the set of colours
/// still possible.
struct Lazy<'a> {
    answers: &'a [bool],
    pos: usize,
    masks: &'a mut HashMap<NodeId, u16>,
    full: u16,
}

impl Colors for Lazy<'_> {
    fn is(&mut self, v: NodeId, c: u8) -> Result<bool, Halt> {
        let mask = *self.masks.get(&v).unwrap_or(&self.full);
        let bit = 1u16 << c;
        if mask & bit == 0 {
            return Ok(false);
        }
        if mask == bit {
            return Ok(true);
        }
        let Some(&yes) = self.answers.get(self.pos) else {
            return Err(Halt::Ask {
                p: 1.0 / mask.count_ones() as f64,
            });
        };
        self.pos += 1;
        self.masks.insert(v, if yes { bit } else { mask & !bit });
        Ok(yes)
    }
}

struct Rep {
    cycle: Option<Vec<NodeId>>,
    truncated: bool,
}

/// Ids a node holds, with the neighbour each came from, in arrival order.
type Holdings = HashMap<NodeId, Vec<(NodeId, NodeId)>>;

struct Protocol<'a> {
    net: &'a CongestNet<'a>,
    g: &'a Graph,
    cfg: &'a ColorBfsConfig,
    sources: &'a [NodeId],
}

impl Protocol<'_> {
    fn run_once(&self, colors: &mut dyn Colors) -> Result<Rep, Halt> {
        let l = self.cfg.cycle_len as u8;
        let half = l / 2;
        let m = self.cfg.congestion_bound as usize;
        let active = &self.cfg.active;
        let heights = &self.cfg.heights;
        let (mut up, mut down) = (Holdings::new(), Holdings::new());
        let mut truncated = false;

        let mut outbox = Vec::new();
        for &s in self.sources {
            if colors.is(s, 0)? {
                for &w in self.g.neighbors(s) {
                    if active[w as usize] && heights[w as usize] <= heights[s as usize] {
                        outbox.push(Message { from: s, to: w, word: s as u64 });
                    }
                }
            }
        }
        let (mut up_front, mut down_front) = (Vec::new(), Vec::new());
        for msg in self.net.deliver(outbox)? {
            let x = msg.word as NodeId;
            if colors.is(msg.to, 1)? {
                hold(&mut up, &mut up_front, msg.to, x, msg.from);
            } else if colors.is(msg.to, l - 1)? {
                hold(&mut down, &mut down_front, msg.to, x, msg.from);
            }
        }

        for i in 1..half {
            truncated |= overflows(&up, &up_front, m) || overflows(&down, &down_front, m);
            let (mut next_up, mut next_down) = (Vec::new(), Vec::new());
            for j in 0..m {
                let mut outbox = self.sends(&up, &up_front, j);
                outbox.extend(self.sends(&down, &down_front, j));
                if outbox.is_empty() {
                    break;
                }
                for msg in self.net.deliver(outbox)? {
                    let x = msg.word as NodeId;
                    if up_front.binary_search(&msg.from).is_ok() {
                        if colors.is(msg.to, i + 1)? {
                            hold(&mut up, &mut next_up, msg.to, x, msg.from);
                        }
                    } else if colors.is(msg.to, l - i - 1)? {
                        hold(&mut down, &mut next_down, msg.to, x, msg.from);
                    }
                }
            }
            next_up.sort_unstable();
            next_down.sort_unstable();
            up_front = next_up;
            down_front = next_down;
        }

        if l % 2 == 0 {
            // Both chains end at colour l/2.
            for &w in &up_front {
                if down_front.binary_search(&w).is_err() {
                    continue;
                }
                let ups = &up[&w];
                if let Some(&(x, b)) = down[&w].iter().find(|(x, _)| ups.iter().any(|(y, _)| y == x)) {
                    return Ok(Rep { cycle: Some(self.close(&up, &down, w, b, x)?), truncated });
                }
            }
        } else {
            // Colour (l+1)/2 nodes hand their ids across to colour (l-1)/2.
            truncated |= overflows(&down, &down_front, m);
            for j in 0..m {
                let outbox = self.sends(&down, &down_front, j);
                if outbox.is_empty() {
                    break;
                }
                for msg in self.net.deliver(outbox)? {
                    let x = msg.word as NodeId;
                    if up_front.binary_search(&msg.to).is_ok() && up[&msg.to].iter().any(|&(y, _)| y == x) {
                        return Ok(Rep { cycle: Some(self.close(&up, &down, msg.to, msg.from, x)?), truncated });
                    }
                }
            }
        }
        Ok(Rep { cycle: None, truncated })
    }

    /// Step `j` of a forwarding phase: each holder sends its `j`-th id to
    /// every active neighbour.
    fn sends(&self, held: &Holdings, front: &[NodeId], j: usize) -> Vec<Message> {
        let mut out = Vec::new();
        for &v in front {
            if let Some(&(x, _)) = held[&v].get(j) {
                out.extend(
                    self.g
                        .neighbors(v)
                        .iter()
                        .filter(|&&w| self.cfg.active[w as usize])
                        .map(|&w| Message { from: v, to: w, word: x as u64 }),
                );
            }
        }
        out
    }

    /// Joins the rising chain ending at `a` with the falling chain ending at `b`.
    fn close(&self, up: &Holdings, down: &Holdings, a: NodeId, b: NodeId, x: NodeId) -> Result<Vec<NodeId>, Halt> {
        let mut cycle = trace(up, a, x);
        cycle.reverse();
        let mut tail = trace(down, b, x);
        tail.pop();
        cycle.extend(tail);
        if cycle.len() != self.cfg.cycle_len || !self.g.is_simple_cycle(&cycle) {
            return Err(Halt::Fail(Error::Invariant(format!("colour BFS reported a non-cycle {cycle:?}"))));
        }
        Ok(cycle)
    }
}

fn hold(held: &mut Holdings, front: &mut Vec<NodeId>, v: NodeId, x: NodeId, from: NodeId) {
    let ids = held.entry(v).or_default();
    if ids.is_empty() {
        front.push(v);
    }
    if !ids.iter().any(|&(y, _)| y == x) {
        ids.push((x, from));
    }
}

fn overflows(held: &Holdings, front: &[NodeId], m: usize) -> bool {
    front.iter().any(|v| held[v].len() > m)
}

/// `[v, .., x]` following the chain that carried `x` to `v`.
fn trace(held: &Holdings, mut v: NodeId, x: NodeId) -> Vec<NodeId> {
    let mut path = vec![v];
    while v != x {
        v = held[&v].iter().find(|&&(y, _)| y == x).map(|&(_, from)| from).expect("held id has a sender");
        path.push(v);
    }
    path
}

/// Replays every colour history that some of the `reps` repetitions follow.
/// Returns the first detected cycle.
fn explore(proto: &Protocol<'_>, reps: u64, rng: &mut Rng, out: &mut ColorBfsOutcome) -> Result<Option<Vec<NodeId>>> {
    let full = ((1u32 << proto.cfg.cycle_len) - 1) as u16;
    let mut masks = HashMap::new();
    let mut stack = vec![(Vec::<bool>::new(), reps)];
    while let Some((answers, count)) = stack.pop() {
        masks.clear();
        let mut lazy = Lazy {
            answers: &answers,
            pos: 0,
            masks: &mut masks,
            full,
        };
        match proto.run_once(&mut lazy) {
            Ok(rep) => {
                out.histories += 1;
                out.truncated |= rep.truncated;
                if rep.cycle.is_some() {
                    return Ok(rep.cycle);
                }
            }
            Err(Halt::Ask { p }) => {
                let yes = if count == 1 {
                    u64::from(rng.random_bool(p))
                } else {
                    Binomial::new(count, p)
                        .map_err(|e| Error::Invariant(format!("binomial split: {e}")))?
                        .sample(rng)
                };
                let mut branch = |answer: bool, c: u64| {
                    if c > 0 {
                        let mut a = answers.clone();
                        a.push(answer);
                        stack.push((a, c));
                    }
                };
                branch(false, count - yes);
                branch(true, yes);
            }
            Err(Halt::Fail(e)) => return Err(e),
        }
    }
    Ok(None)
}
