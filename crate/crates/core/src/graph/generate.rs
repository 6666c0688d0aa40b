use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::seed::{rng_for, stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    Gnp,
    PlantedClique,
    PlantedCycle,
    Complete,
    Path,
    Cycle,
    Empty,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::Gnp => "gnp",
            GenKind::PlantedClique => "planted_clique",
            GenKind::PlantedCycle => "planted_cycle",
            GenKind::Complete => "complete",
            GenKind::Path => "path",
            GenKind::Cycle => "cycle",
            GenKind::Empty => "empty",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = Error;

    /// Accepts `-` in place of `_`.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "gnp" => GenKind::Gnp,
            "planted_clique" => GenKind::PlantedClique,
            "planted_cycle" => GenKind::PlantedCycle,
            "complete" => GenKind::Complete,
            "path" => GenKind::Path,
            "cycle" => GenKind::Cycle,
            "empty" => GenKind::Empty,
            other => return Err(Error::invalid("kind", format!("unknown generator `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub edge_prob: f64,
    pub planted_size: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize) -> Self {
        GenSpec {
            kind,
            n,
            edge_prob: 0.0,
            planted_size: 0,
            seed: 0,
        }
    }

    pub fn gnp(n: usize, edge_prob: f64, seed: u64) -> Self {
        GenSpec {
            edge_prob,
            seed,
            ..GenSpec::new(GenKind::Gnp, n)
        }
    }

    pub fn planted_clique(n: usize, size: usize, edge_prob: f64, seed: u64) -> Self {
        GenSpec {
            edge_prob,
            planted_size: size,
            seed,
            ..GenSpec::new(GenKind::PlantedClique, n)
        }
    }

    pub fn planted_cycle(n: usize, len: usize, edge_prob: f64, seed: u64) -> Self {
        GenSpec {
            edge_prob,
            planted_size: len,
            seed,
            ..GenSpec::new(GenKind::PlantedCycle, n)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return Err(Error::invalid(
                "edge_prob",
                format!("{} is outside [0, 1]", self.edge_prob),
            ));
        }
        if self.planted_size > self.n {
            return Err(Error::invalid(
                "planted_size",
                format!("{} exceeds n = {}", self.planted_size, self.n),
            ));
        }
        match self.kind {
            GenKind::PlantedCycle if self.planted_size < 3 => Err(Error::invalid(
                "planted_size",
                "a planted cycle needs at least 3 nodes",
            )),
            GenKind::Cycle if self.n < 3 => {
                Err(Error::invalid("n", "a cycle graph needs at least 3 nodes"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.kind, self.n, self.edge_prob, self.planted_size, self.seed
        )
    }
}

/// Parses `kind,n,prob,size,seed`; trailing fields may be omitted.
impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 5 {
            return Err(Error::invalid(
                "gen",
                format!("expected kind,n[,prob[,size[,seed]]], got `{s}`"),
            ));
        }
        let num = |field: &'static str, text: &str| -> Result<u64> {
            text.parse()
                .map_err(|_| Error::invalid(field, format!("`{text}` is not a non-negative integer")))
        };
        let mut spec = GenSpec::new(parts[0].parse()?, num("n", parts[1])? as usize);
        if let Some(p) = parts.get(2) {
            spec.edge_prob = p
                .parse()
                .map_err(|_| Error::invalid("edge_prob", format!("`{p}` is not a number")))?;
        }
        if let Some(size) = parts.get(3) {
            spec.planted_size = num("planted_size", size)? as usize;
        }
        if let Some(seed) = parts.get(4) {
            spec.seed = num("seed", seed)?;
        }
        Ok(spec)
    }
}

/// Builds the graph described by `spec`. Pure in `spec`.
pub fn generate(spec: &GenSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n;
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    let k = spec.planted_size;
    let planted = |u: usize, v: usize| -> Option<bool> {
        match spec.kind {
            GenKind::PlantedClique if v < k => Some(true),
            GenKind::PlantedCycle if v < k && (v == u + 1 || (u == 0 && v == k - 1)) => Some(true),
            _ => None,
        }
    };
    match spec.kind {
        GenKind::Empty => {}
        GenKind::Complete => {
            for u in 0..n {
                for v in u + 1..n {
                    pairs.push((u as NodeId, v as NodeId));
                }
            }
        }
        GenKind::Path | GenKind::Cycle => {
            for u in 1..n {
                pairs.push(((u - 1) as NodeId, u as NodeId));
            }
            if spec.kind == GenKind::Cycle {
                pairs.push((0, (n - 1) as NodeId));
                pairs.sort_unstable();
            }
        }
        GenKind::Gnp | GenKind::PlantedClique | GenKind::PlantedCycle => {
            let mut rng = rng_for(spec.seed, stage::GENERATE, n as u64);
            for u in 0..n {
                for v in u + 1..n {
                    // One draw per pair keeps the stream aligned across kinds.
                    let coin = rng.random::<f64>() < spec.edge_prob;
                    if planted(u, v).unwrap_or(coin) {
                        pairs.push((u as NodeId, v as NodeId));
                    }
                }
            }
        }
    }
    Ok(Graph::from_sorted_unique(n, &pairs))
}
