//! Cycle detection in Quantum CONGEST.
//!
//! Odd lengths search over single-source colour BFS runs. Even lengths first
//! rule out dense graphs, then search heavy nodes as sources, then light
//! cycles by random source classes over a forest decomposition.
//!
//! A disconnected input runs once per component that is large enough to
//! hold a cycle; components run side by side, so the slowest one is charged.

mod colorbfs;
mod forest;

use rand::Rng as _;

pub use colorbfs::{
    charge_color_bfs, color_bfs, repetitions_for, rounds_per_repetition, run_with_colors,
    single_repetition_rate, ColorBfsConfig, ColorBfsOutcome, ENUMERATED_MAX_LEN,
};
pub use forest::{forest_decomposition, layer_budget, ForestDecomposition};

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::Input;
use crate::netsim::{CongestNet, CostLedger, Model};
use crate::par;
use crate::qsearch::{run_search, QuantumCostParams, SearchContext};
use crate::seed::{rng_for, stage, sub_seed};
use crate::sizing::{ceil_pow, ceil_snap};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CycleConfig {
    pub params: QuantumCostParams,
    pub seed: u64,
}

/// The stage that decided a positive answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fired {
    Prune,
    Heavy,
    Forest,
    Light,
    Search,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleDetection {
    /// `None` for cost-only runs that did not stop at the edge count.
    pub found: Option<bool>,
    pub fired: Option<Fired>,
    pub witness: Option<Vec<NodeId>>,
    pub queries: u64,
    /// Some colour BFS repetition dropped ids beyond the congestion bound.
    pub truncated: bool,
    pub max_congestion: u64,
}

impl CycleDetection {
    pub fn is_found(&self) -> bool {
        self.found == Some(true)
    }

    fn hit(&mut self, fired: Fired, witness: Option<Vec<NodeId>>) {
        self.found = Some(true);
        self.fired = Some(fired);
        self.witness = witness;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvenCycleParams {
    pub k: usize,
    /// Heavy nodes have degree at least `n^delta`.
    pub delta: f64,
    /// Light sources are split into `ceil(n^alpha)` classes.
    pub alpha: f64,
    /// More than `prune_const * n^(1+1/k)` edges rejects at once.
    pub prune_const: f64,
    /// Peel threshold is `2a` with `a = ceil(arboricity_const * n^(1/k))`.
    pub arboricity_const: f64,
    /// Light colour BFS congestion bound `ceil(congestion_const * log2 n)`.
    pub congestion_const: f64,
    /// Per-query miss probability of the colour BFS.
    pub eps: f64,
}

impl EvenCycleParams {
    pub fn new(k: usize) -> Self {
        let kf = k as f64;
        let delta = (kf - 2.0) / (kf * (kf - 1.0));
        EvenCycleParams {
            k,
            delta,
            alpha: 1.0 / kf + (kf - 2.0) * delta,
            prune_const: 100.0 * kf,
            arboricity_const: 4.0,
            congestion_const: 4.0,
            eps: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("k", "even cycles need k >= 2"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::invalid("delta", format!("{} is outside [0, 1)", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside (0, 1]", self.alpha)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid("eps", format!("{} is outside (0, 1)", self.eps)));
        }
        if self.prune_const <= 0.0 || self.arboricity_const <= 0.0 || self.congestion_const <= 0.0 {
            return Err(Error::invalid("params", "constants must be positive"));
        }
        Ok(())
    }
}

/// Sizes shared by every component, all derived from the global `n`.
#[derive(Clone, Debug)]
struct EvenPlan {
    ell: usize,
    reps: u64,
    prune_edges: f64,
    heavy_degree: u64,
    a: u64,
    budget: u32,
    indices: u64,
    light_bound: u64,
}

impl EvenPlan {
    fn new(n: usize, params: &EvenCycleParams) -> Self {
        let nf = n.max(2) as f64;
        let k = params.k as f64;
        EvenPlan {
            ell: 2 * params.k,
            reps: repetitions_for(2 * params.k, params.eps),
            prune_edges: params.prune_const * nf.powf(1.0 + 1.0 / k),
            heavy_degree: ceil_pow(n as u64, params.delta).max(1),
            a: ceil_snap(params.arboricity_const * nf.powf(1.0 / k)).max(1),
            budget: layer_budget(n),
            indices: ceil_pow(n as u64, params.alpha).max(1),
            light_bound: ceil_snap(params.congestion_const * nf.log2()).max(1),
        }
    }
}

/// A component network, with its global ids when materialized.
struct Part<'a> {
    net: CongestNet<'a>,
    nodes: Option<&'a [NodeId]>,
}

impl Part<'_> {
    fn global(&self, v: NodeId) -> NodeId {
        self.nodes.map_or(v, |nodes| nodes[v as usize])
    }

    fn query_seed(&self, seed: u64, tag: u64, x: u64) -> u64 {
        sub_seed(sub_seed(seed, tag, self.global(0) as u64), stage::COLOR_QUERY, x)
    }
}

const TAG_ODD: u64 = 1;
const TAG_HEAVY: u64 = 2;
const TAG_LIGHT: u64 = 3;

/// Runs `run` on every component with at least `min_nodes` nodes and charges
/// the most expensive one.
fn per_component<F>(input: Input<'_>, min_nodes: usize, ledger: &mut CostLedger, run: F) -> Result<CycleDetection>
where
    F: Fn(&Part<'_>, u64, &[u64], &mut CostLedger) -> Result<CycleDetection> + Sync,
{
    let g = match input {
        Input::Synthetic(s) => {
            let part = Part {
                net: CongestNet::synthetic(s.n, s.eccentricity),
                nodes: None,
            };
            return run(&part, s.m, &s.degrees(), ledger);
        }
        Input::Graph(g) => g,
    };
    let comps: Vec<Vec<NodeId>> = g.components().into_iter().filter(|c| c.len() >= min_nodes).collect();
    let results = par::map(comps, |nodes| -> Result<(CycleDetection, CostLedger)> {
        let sub = g.induced(&nodes);
        let part = Part {
            net: CongestNet::new(&sub)?,
            nodes: Some(&nodes),
        };
        let mut local = CostLedger::new();
        let mut d = run(&part, sub.m() as u64, &sub.degrees(), &mut local)?;
        d.witness = d.witness.map(|w| w.into_iter().map(|v| part.global(v)).collect());
        Ok((d, local))
    });
    let mut out = CycleDetection {
        found: Some(false),
        ..CycleDetection::default()
    };
    let mut slowest: Option<CostLedger> = None;
    for r in results {
        let (d, local) = r?;
        if d.is_found() && !out.is_found() {
            out.hit(d.fired.unwrap_or(Fired::Search), d.witness);
        }
        out.queries += d.queries;
        out.truncated |= d.truncated;
        out.max_congestion = out.max_congestion.max(d.max_congestion);
        if slowest.as_ref().is_none_or(|s| local.total() > s.total()) {
            slowest = Some(local);
        }
    }
    if let Some(s) = slowest {
        ledger.append(s);
    }
    Ok(out)
}

/// Searches sources one at a time with a colour BFS each; `l` odd, `5 <= l <= n`.
pub fn detect_odd_cycle(input: Input<'_>, ell: usize, cfg: &CycleConfig, ledger: &mut CostLedger) -> Result<CycleDetection> {
    if ell % 2 == 0 {
        return Err(Error::invalid("ell", format!("{ell} is even; use detect_even_cycle")));
    }
    let n = input.n();
    if ell < 5 || ell > n {
        return Err(Error::invalid("ell", format!("need 5 <= ell <= n = {n}, got {ell}")));
    }
    let reps = repetitions_for(ell, 1.0 / (n as f64 * n as f64));
    per_component(input, ell, ledger, |part, _m, _deg, ledger| {
        let mut d = CycleDetection::default();
        let outcome = search_sources(part, ell, reps, TAG_ODD, cfg, ledger, &mut d, |x| {
            (vec![x as NodeId], None, None)
        }, 1, part.net.n() as u64, format!("C{ell}: search sources"))?;
        if outcome {
            d.fired = Some(Fired::Search);
        }
        Ok(d)
    })
}

type SourceQuery = (Vec<NodeId>, Option<Vec<bool>>, Option<Vec<u32>>);

/// A Grover search whose query `x` is one colour BFS. Records congestion and
/// the witness of the last marked query in `d`.
#[allow(clippy::too_many_arguments)]
fn search_sources<Q>(
    part: &Part<'_>,
    ell: usize,
    reps: u64,
    tag: u64,
    cfg: &CycleConfig,
    ledger: &mut CostLedger,
    d: &mut CycleDetection,
    query: Q,
    bound: u64,
    domain: u64,
    phase: String,
) -> Result<bool>
where
    Q: Fn(u64) -> SourceQuery,
{
    let net = &part.net;
    let ctx = SearchContext::new(phase, Model::Congest, cfg.seed).cost_only(net.graph().is_none());
    let mut witness = None;
    let outcome = run_search(
        domain,
        |x, scratch| {
            let Some(g) = net.graph() else {
                charge_color_bfs(net, ell, bound, reps, scratch);
                return Ok(false);
            };
            let (sources, active, heights) = query(x);
            let mut bfs = ColorBfsConfig::new(g.n(), ell, sources, bound, reps);
            if let Some(a) = active {
                bfs = bfs.with_active(a);
            }
            if let Some(h) = heights {
                bfs = bfs.with_heights(h);
            }
            let out = color_bfs(net, &bfs, part.query_seed(cfg.seed, tag, x), scratch)?;
            d.truncated |= out.truncated;
            d.max_congestion = d.max_congestion.max(out.max_congestion);
            if out.found {
                witness = out.witness;
            }
            Ok(out.found)
        },
        ledger,
        &cfg.params,
        &ctx,
    )?;
    d.queries += outcome.queries_evaluated;
    if net.graph().is_some() {
        d.found = Some(outcome.found);
        if outcome.found {
            d.witness = witness;
        }
    }
    Ok(outcome.found)
}

/// `2k`-cycle detection; `4 <= 2k <= n` and `params.k = k`.
pub fn detect_even_cycle(
    input: Input<'_>,
    two_k: usize,
    params: &EvenCycleParams,
    cfg: &CycleConfig,
    ledger: &mut CostLedger,
) -> Result<CycleDetection> {
    if two_k % 2 == 1 {
        return Err(Error::invalid("ell", format!("{two_k} is odd; use detect_odd_cycle")));
    }
    let n = input.n();
    if two_k < 4 || two_k > n {
        return Err(Error::invalid("ell", format!("need 4 <= ell <= n = {n}, got {two_k}")));
    }
    params.validate()?;
    if params.k * 2 != two_k {
        return Err(Error::invalid("k", format!("params are for C{} but C{two_k} was asked", 2 * params.k)));
    }
    let plan = EvenPlan::new(n, params);
    per_component(input, two_k, ledger, |part, m, degrees, ledger| even_component(part, m, degrees, &plan, cfg, ledger))
}

fn even_component(
    part: &Part<'_>,
    m: u64,
    degrees: &[u64],
    plan: &EvenPlan,
    cfg: &CycleConfig,
    ledger: &mut CostLedger,
) -> Result<CycleDetection> {
    let net = &part.net;
    let ell = plan.ell;
    let mut d = CycleDetection::default();
    net.converge_to_leader(ledger, "even: count edges", net.capacity());
    if m as f64 > plan.prune_edges {
        d.hit(Fired::Prune, None);
        return Ok(d);
    }

    let heavy: Vec<NodeId> = (0..degrees.len() as NodeId).filter(|&v| degrees[v as usize] >= plan.heavy_degree).collect();
    let light: Vec<bool> = degrees.iter().map(|&deg| deg < plan.heavy_degree).collect();
    let light_edges = match net.graph() {
        Some(g) => g.edges().any(|(u, v)| light[u as usize] && light[v as usize]),
        None => degrees.iter().filter(|&&deg| deg > 0 && deg < plan.heavy_degree).count() >= 2,
    };
    // Heavy count and the light-edge flag go up the tree, rank offsets come back down.
    net.converge_to_leader(ledger, "even: count heavy nodes", net.capacity() + 1);
    net.converge_to_leader(ledger, "even: hand out heavy ranks", net.capacity());

    let found = search_sources(part, ell, plan.reps, TAG_HEAVY, cfg, ledger, &mut d, |x| {
        (vec![heavy[x as usize]], None, None)
    }, 1, heavy.len() as u64, format!("C{ell}: search heavy sources"))?;
    if found {
        d.fired = Some(Fired::Heavy);
        return Ok(d);
    }
    if !light_edges {
        return Ok(d);
    }

    let layers = match net.graph() {
        Some(g) => match forest::peel(g, &light, plan.a, plan.budget, ledger) {
            Some(f) => Some(f.layers),
            None => {
                d.hit(Fired::Forest, None);
                return Ok(d);
            }
        },
        None => {
            forest::charge_peel(ledger, plan.budget);
            None
        }
    };
    let index: Vec<u64> = match net.graph() {
        Some(g) => (0..g.n() as NodeId)
            .map(|v| rng_for(cfg.seed, stage::LIGHT_INDEX, part.global(v) as u64).random_range(0..plan.indices))
            .collect(),
        None => Vec::new(),
    };
    let found = search_sources(part, ell, plan.reps, TAG_LIGHT, cfg, ledger, &mut d, |i| {
        let sources = (0..index.len() as NodeId).filter(|&v| light[v as usize] && index[v as usize] == i).collect();
        (sources, Some(light.clone()), layers.clone())
    }, plan.light_bound, plan.indices, format!("C{ell}: search light index classes"))?;
    if found {
        d.fired = Some(Fired::Light);
    }
    Ok(d)
}

/// Dispatches on parity with default even-cycle parameters.
pub fn detect_cycle(input: Input<'_>, ell: usize, cfg: &CycleConfig, ledger: &mut CostLedger) -> Result<CycleDetection> {
    if ell % 2 == 1 {
        detect_odd_cycle(input, ell, cfg, ledger)
    } else {
        detect_even_cycle(input, ell, &EvenCycleParams::new(ell / 2), cfg, ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, oracle_has_cycle, GenKind, GenSpec, Graph};
    use crate::instance::SyntheticGraph;

    fn cfg(seed: u64) -> CycleConfig {
        CycleConfig {
            seed,
            ..CycleConfig::default()
        }
    }

    fn padded_cycle(n: usize, len: usize) -> Graph {
        let edges: Vec<(NodeId, NodeId)> = (0..len as NodeId).map(|v| (v, (v + 1) % len as NodeId)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn default_params() {
        let p = EvenCycleParams::new(3);
        assert!((p.delta - 1.0 / 6.0).abs() < 1e-12);
        assert!((p.alpha - 0.5).abs() < 1e-12);
        assert_eq!(p.prune_const, 300.0);
        let p2 = EvenCycleParams::new(2);
        assert_eq!((p2.delta, p2.alpha), (0.0, 0.5));
        let plan = EvenPlan::new(64, &EvenCycleParams::new(3));
        assert_eq!((plan.heavy_degree, plan.a, plan.indices, plan.light_bound), (2, 16, 8, 24));
    }

    #[test]
    fn odd_cycle_examples() {
        let g = padded_cycle(20, 5);
        let mut hits = 0;
        for seed in 0..40 {
            let d = detect_odd_cycle(Input::Graph(&g), 5, &cfg(seed), &mut CostLedger::new()).unwrap();
            if d.is_found() {
                assert!(g.is_simple_cycle(d.witness.as_ref().unwrap()));
                hits += 1;
            }
        }
        assert!(hits >= 39);
        let tree = generate(&GenSpec::new(GenKind::Path, 20)).unwrap();
        for seed in 0..5 {
            assert_eq!(detect_odd_cycle(Input::Graph(&tree), 5, &cfg(seed), &mut CostLedger::new()).unwrap().found, Some(false));
        }
        let err = detect_odd_cycle(Input::Graph(&g), 6, &cfg(0), &mut CostLedger::new());
        assert!(matches!(err, Err(Error::InvalidArgument { field: "ell", .. })));
    }

    #[test]
    fn odd_cycle_charges_grover_plus_reports() {
        let g = generate(&GenSpec::new(GenKind::Cycle, 12)).unwrap();
        let mut ledger = CostLedger::new();
        detect_odd_cycle(Input::Graph(&g), 5, &cfg(0), &mut ledger).unwrap();
        let net = CongestNet::new(&g).unwrap();
        let reps = repetitions_for(5, 1.0 / 144.0);
        let query = reps * rounds_per_repetition(5, 1) + net.eccentricity();
        let params = QuantumCostParams::default();
        assert_eq!(ledger.total(), crate::qsearch::grover_cost(12, query, &params));
    }

    #[test]
    fn even_cycle_examples() {
        let g = padded_cycle(64, 4);
        let params = EvenCycleParams::new(2);
        let mut hits = 0;
        for seed in 0..40 {
            let d = detect_even_cycle(Input::Graph(&g), 4, &params, &cfg(seed), &mut CostLedger::new()).unwrap();
            hits += u32::from(d.is_found());
        }
        assert!(hits >= 39);
        let tree = generate(&GenSpec::new(GenKind::Path, 30)).unwrap();
        for (two_k, seed) in [(4, 0), (6, 1), (8, 2)] {
            let p = EvenCycleParams::new(two_k / 2);
            let d = detect_even_cycle(Input::Graph(&tree), two_k, &p, &cfg(seed), &mut CostLedger::new()).unwrap();
            assert_eq!(d.found, Some(false));
        }
    }

    #[test]
    fn prune_fires_on_dense_counts() {
        let dense = generate(&GenSpec::gnp(64, 0.9, 1)).unwrap();
        let params = EvenCycleParams::new(2);
        let d = detect_even_cycle(Input::Graph(&dense), 4, &params, &cfg(0), &mut CostLedger::new()).unwrap();
        assert_ne!(d.fired, Some(Fired::Prune));
        let tight = EvenCycleParams {
            prune_const: 0.001,
            ..params
        };
        let syn = SyntheticGraph::new(4096, 5000).unwrap();
        let mut ledger = CostLedger::new();
        let d = detect_even_cycle(Input::Synthetic(&syn), 4, &tight, &cfg(0), &mut ledger).unwrap();
        assert_eq!((d.found, d.fired), (Some(true), Some(Fired::Prune)));
        assert_eq!(ledger.total(), 1);
    }

    #[test]
    fn light_stage_finds_light_hexagons() {
        // Degrees stay at 2, below n^(1/6) for n = 96, so the cycle is light.
        let g = padded_cycle(96, 6);
        let params = EvenCycleParams::new(3);
        let mut light = 0;
        for seed in 0..20 {
            let d = detect_even_cycle(Input::Graph(&g), 6, &params, &cfg(seed), &mut CostLedger::new()).unwrap();
            assert!(d.is_found());
            light += u32::from(d.fired == Some(Fired::Light));
            assert!(g.is_simple_cycle(d.witness.as_ref().unwrap()));
        }
        assert_eq!(light, 20);
    }

    #[test]
    fn matches_oracle_on_small_random_graphs() {
        for seed in 0..12 {
            let g = generate(&GenSpec::gnp(24, 0.09, seed)).unwrap();
            for ell in [4, 5, 6] {
                let d = detect_cycle(Input::Graph(&g), ell, &cfg(seed), &mut CostLedger::new()).unwrap();
                let truth = oracle_has_cycle(&g, ell);
                if d.is_found() {
                    assert!(truth || matches!(d.fired, Some(Fired::Prune | Fired::Forest)), "seed {seed} ell {ell}");
                } else {
                    assert!(!truth, "missed C{ell} on seed {seed}");
                }
            }
        }
    }

    #[test]
    fn cost_only_matches_full_even() {
        let g = generate(&GenSpec::new(GenKind::Cycle, 1024)).unwrap();
        let net = CongestNet::new(&g).unwrap();
        let syn = SyntheticGraph::new(1024, 1024)
            .unwrap()
            .with_degrees(g.degrees())
            .unwrap()
            .with_eccentricity(net.eccentricity());
        for k in [2, 3] {
            let params = EvenCycleParams::new(k);
            let (mut a, mut b) = (CostLedger::new(), CostLedger::new());
            let full = detect_even_cycle(Input::Graph(&g), 2 * k, &params, &cfg(0), &mut a).unwrap();
            assert_eq!(full.found, Some(false));
            let cost = detect_even_cycle(Input::Synthetic(&syn), 2 * k, &params, &cfg(0), &mut b).unwrap();
            assert_eq!(cost.found, None);
            assert_eq!(a, b, "k = {k}");
        }
    }

    #[test]
    fn cost_only_matches_full_odd() {
        let g = generate(&GenSpec::new(GenKind::Cycle, 1024)).unwrap();
        let net = CongestNet::new(&g).unwrap();
        let syn = SyntheticGraph::new(1024, 1024).unwrap().with_eccentricity(net.eccentricity());
        let (mut a, mut b) = (CostLedger::new(), CostLedger::new());
        detect_odd_cycle(Input::Graph(&g), 5, &cfg(0), &mut a).unwrap();
        detect_odd_cycle(Input::Synthetic(&syn), 5, &cfg(0), &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn components_charge_the_slowest() {
        // A C5 and a separate path; only the C5 component can fire.
        let mut edges: Vec<(NodeId, NodeId)> = (0..5).map(|v| (v, (v + 1) % 5)).collect();
        edges.extend((10..19).map(|v| (v, v + 1)));
        let g = Graph::from_edges(20, &edges).unwrap();
        let d = detect_odd_cycle(Input::Graph(&g), 5, &cfg(2), &mut CostLedger::new()).unwrap();
        assert!(d.is_found());
        let w = d.witness.unwrap();
        assert!(w.iter().all(|&v| v < 5));
    }
}
