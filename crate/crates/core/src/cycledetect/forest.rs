//! Layered peeling: each layer takes every remaining node with at most `2a`
//! remaining neighbours.

use crate::graph::{Graph, NodeId};
use crate::netsim::{CostLedger, Kind, Model};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestDecomposition {
    /// Layer of each active node, from 1; 0 for inactive nodes.
    pub layers: Vec<u32>,
    pub num_layers: u32,
    pub a: u64,
}

impl ForestDecomposition {
    /// Every active node has at most `2a` active neighbours in its own layer or above.
    pub fn verify(&self, g: &Graph) -> bool {
        (0..g.n() as NodeId).all(|v| {
            let lv = self.layers[v as usize];
            lv == 0
                || g.neighbors(v)
                    .iter()
                    .filter(|&&w| self.layers[w as usize] >= lv)
                    .count() as u64
                    <= 2 * self.a
        })
    }
}

/// `ceil(2 log2 n)`, at least 1.
pub fn layer_budget(n: usize) -> u32 {
    (2.0 * (n.max(2) as f64).log2()).ceil() as u32
}

/// Peels the active nodes of `g` for up to `layer_budget(g.n())` layers, one
/// round each. `None` means nodes were left over.
pub fn forest_decomposition(g: &Graph, active: &[bool], a: u64, ledger: &mut CostLedger) -> Option<ForestDecomposition> {
    peel(g, active, a, layer_budget(g.n()), ledger)
}

pub(crate) fn peel(g: &Graph, active: &[bool], a: u64, budget: u32, ledger: &mut CostLedger) -> Option<ForestDecomposition> {
    charge_peel(ledger, budget);
    let n = g.n();
    let mut layers = vec![0u32; n];
    let mut residual: Vec<u64> = (0..n as NodeId)
        .map(|v| g.neighbors(v).iter().filter(|&&w| active[w as usize]).count() as u64)
        .collect();
    let mut left: Vec<NodeId> = (0..n as NodeId).filter(|&v| active[v as usize]).collect();
    let mut layer = 0;
    while !left.is_empty() && layer < budget {
        layer += 1;
        let (peeled, rest): (Vec<NodeId>, Vec<NodeId>) = left.iter().partition(|&&v| residual[v as usize] <= 2 * a);
        if peeled.is_empty() {
            return None;
        }
        for &v in &peeled {
            layers[v as usize] = layer;
        }
        for &v in &peeled {
            for &w in g.neighbors(v) {
                if active[w as usize] && layers[w as usize] == 0 {
                    residual[w as usize] -= 1;
                }
            }
        }
        left = rest;
    }
    left.is_empty().then_some(ForestDecomposition {
        layers,
        num_layers: layer,
        a,
    })
}

pub(crate) fn charge_peel(ledger: &mut CostLedger, budget: u32) {
    ledger.charge("forest decomposition: peel layers", Model::Congest, Kind::Route, budget as u64);
}
