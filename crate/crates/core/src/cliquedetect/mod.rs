//! Clique detection in the Quantum Congested Clique.

mod extend;
mod nested;
mod triangle;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

pub use extend::{extend_blackbox, extend_sparse};
pub use nested::{detect_nested, detect_plus1, nested_exponents};
pub use triangle::detect_triangle_quintic;

use crate::cliquelist::list_kp;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::instance::Input;
use crate::netsim::{CliqueModel, CostLedger};
use crate::qsearch::QuantumCostParams;
use crate::sizing::{ceil_pow, BalancedRanges};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Triangle15,
    Plus1,
    Nested,
    Sparse,
    Blackbox,
}

impl Strategy {
    /// Tie-break order of the planner.
    pub const ALL: [Strategy; 5] = [
        Strategy::Triangle15,
        Strategy::Plus1,
        Strategy::Nested,
        Strategy::Sparse,
        Strategy::Blackbox,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Triangle15 => "triangle15",
            Strategy::Plus1 => "plus1",
            Strategy::Nested => "nested",
            Strategy::Sparse => "sparse",
            Strategy::Blackbox => "blackbox",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::invalid("strategy", format!("unknown strategy `{s}`")))
    }
}

/// Knobs shared by every detection algorithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectConfig {
    pub model: CliqueModel,
    pub params: QuantumCostParams,
    pub seed: u64,
}

impl DetectConfig {
    pub fn new(n: usize) -> Self {
        DetectConfig {
            model: CliqueModel::new(n),
            params: QuantumCostParams::default(),
            seed: 0,
        }
    }
}

/// Result of a detection run. `found` is `None` for cost-only runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    pub found: Option<bool>,
    pub witness: Option<Vec<NodeId>>,
    pub queries: u64,
}

impl Detection {
    pub(crate) fn nothing(cost_only: bool) -> Self {
        Detection {
            found: (!cost_only).then_some(false),
            witness: None,
            queries: 0,
        }
    }

    pub fn is_found(&self) -> bool {
        self.found == Some(true)
    }
}

/// Parts of one search level: `ceil(n^r)` contiguous ranges of balanced size.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPartition {
    pub level: usize,
    pub exponent: f64,
    pub ranges: BalancedRanges,
}

impl LevelPartition {
    pub fn new(n: usize, level: usize, exponent: f64) -> Self {
        LevelPartition {
            level,
            exponent,
            ranges: BalancedRanges::new(n as u64, ceil_pow(n as u64, exponent).max(1)),
        }
    }

    pub fn parts(&self) -> u64 {
        self.ranges.count()
    }

    pub fn part(&self, i: u64) -> Range<NodeId> {
        self.ranges.range(i)
    }

    pub fn max_size(&self) -> u64 {
        self.ranges.max_size()
    }
}

/// Contiguous batches filled greedily until their degree sum reaches `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBatching {
    pub target: u64,
    pub batches: Vec<Range<NodeId>>,
    pub sums: Vec<u64>,
}

impl DegreeBatching {
    pub fn greedy(degrees: &[u64], target: u64) -> Self {
        let target = target.max(1);
        let mut batches = Vec::new();
        let mut sums = Vec::new();
        let (mut start, mut sum) = (0usize, 0u64);
        for (v, &d) in degrees.iter().enumerate() {
            sum += d;
            if sum >= target {
                batches.push(start as NodeId..v as NodeId + 1);
                sums.push(sum);
                start = v + 1;
                sum = 0;
            }
        }
        if start < degrees.len() || batches.is_empty() {
            batches.push(start as NodeId..degrees.len() as NodeId);
            sums.push(sum);
        }
        DegreeBatching {
            target,
            batches,
            sums,
        }
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn max_sum(&self) -> u64 {
        self.sums.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPlan {
    pub q: usize,
    pub strategy: Strategy,
    pub p: usize,
    pub t: usize,
    pub predicted_exponent: f64,
}

impl DetectionPlan {
    /// Canonical text used in result rows.
    pub fn params_text(&self) -> String {
        format!("q={};p={};t={}", self.q, self.p, self.t)
    }
}

/// Whether `t <= 1 + log2(p - 1)`.
pub fn nested_feasible(p: usize, t: usize) -> bool {
    p >= 2 && t >= 1 && t <= 63 && (1u64 << (t - 1)) <= (p - 1) as u64
}

/// Predicted round exponent, or `None` when the strategy cannot take `(p, t)`.
pub fn predicted_exponent(strategy: Strategy, n: usize, m: u64, p: usize, t: usize) -> Option<f64> {
    if p < 2 || t < 1 {
        return None;
    }
    let listing = 1.0 - 2.0 / p as f64;
    let shrink = 1.0 - 0.5f64.powi(t as i32);
    match strategy {
        Strategy::Triangle15 => (p == 2 && t == 1).then_some(0.2),
        Strategy::Plus1 => (t == 1).then(|| listing.max((1.0 - 1.0 / p as f64) / 2.0)),
        Strategy::Nested => {
            nested_feasible(p, t).then(|| listing.max((1.0 - 1.0 / p as f64) * shrink))
        }
        Strategy::Blackbox => Some(listing.max(shrink)),
        Strategy::Sparse => {
            let mu = m as f64 / n.max(1) as f64;
            let log_mu = if n > 1 && mu > 1.0 {
                mu.ln() / (n as f64).ln()
            } else {
                0.0
            };
            Some(listing.max(log_mu * shrink))
        }
    }
}

/// Best `(strategy, p, t)` for `K_q`, optionally restricted to one strategy.
/// Ties go to smaller `t`, then smaller `p`, then the order of `Strategy::ALL`.
pub fn plan_for(n: usize, m: u64, q: usize, only: Option<Strategy>) -> Result<DetectionPlan> {
    if q < 3 {
        return Err(Error::invalid("q", format!("clique size must be >= 3, got {q}")));
    }
    let mut best: Option<DetectionPlan> = None;
    for t in 1..=q - 2 {
        let p = q - t;
        for strategy in Strategy::ALL {
            if only.is_some_and(|s| s != strategy) {
                continue;
            }
            let Some(e) = predicted_exponent(strategy, n, m, p, t) else {
                continue;
            };
            if best.as_ref().is_none_or(|b| e < b.predicted_exponent - 1e-12) {
                best = Some(DetectionPlan {
                    q,
                    strategy,
                    p,
                    t,
                    predicted_exponent: e,
                });
            }
        }
    }
    best.ok_or_else(|| {
        Error::invalid(
            "strategy",
            format!("{} cannot detect K{q}", only.map_or("no strategy", Strategy::name)),
        )
    })
}

pub fn plan_strategy(n: usize, m: u64, q: usize) -> Result<DetectionPlan> {
    plan_for(n, m, q, None)
}

/// Runs a fixed plan.
pub fn detect_with_plan(
    input: Input<'_>,
    plan: &DetectionPlan,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<Detection> {
    if plan.p + plan.t != plan.q {
        return Err(Error::invalid("t", format!("p + t = {} but q = {}", plan.p + plan.t, plan.q)));
    }
    if plan.q > input.n() || input.m() == 0 {
        return Ok(Detection::nothing(input.is_cost_only()));
    }
    let found = match plan.strategy {
        Strategy::Triangle15 => {
            if plan.q != 3 {
                return Err(Error::invalid("strategy", "triangle15 only detects K3"));
            }
            detect_triangle_quintic(input, cfg, ledger)?
        }
        Strategy::Plus1 => {
            if plan.t != 1 {
                return Err(Error::invalid("t", "plus1 extends by exactly one node"));
            }
            detect_plus1(input, plan.p, cfg, ledger)?
        }
        Strategy::Nested => detect_nested(input, plan.p, plan.t, cfg, ledger)?,
        Strategy::Blackbox | Strategy::Sparse => {
            let inv = list_kp(input, plan.p, &cfg.model, ledger, None)?;
            if plan.strategy == Strategy::Blackbox {
                extend_blackbox(input, &inv, plan.t, cfg, ledger)?
            } else {
                extend_sparse(input, &inv, plan.t, cfg, ledger)?
            }
        }
    };
    if let (Some(g), Some(w)) = (input.graph(), &found.witness) {
        if w.len() != plan.q || !g.is_clique(w) {
            return Err(Error::Invariant(format!("reported K{} witness {w:?} is not a clique", plan.q)));
        }
    }
    Ok(found)
}

/// Detects `K_q`, planning `(p, t)` unless a strategy is forced.
pub fn detect_clique(
    input: Input<'_>,
    q: usize,
    strategy: Option<Strategy>,
    cfg: &DetectConfig,
    ledger: &mut CostLedger,
) -> Result<(DetectionPlan, Detection)> {
    let plan = plan_for(input.n(), input.m(), q, strategy)?;
    let found = detect_with_plan(input, &plan, cfg, ledger)?;
    Ok((plan, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use super::Strategy;

    #[test]
    fn planner_examples() {
        let n = 4096;
        let m = (n * (n - 1) / 2) as u64;
        let q4 = plan_strategy(n, m, 4).unwrap();
        assert_eq!((q4.p, q4.t), (3, 1));
        assert!((q4.predicted_exponent - 1.0 / 3.0).abs() < 1e-12);
        let q5 = plan_strategy(n, m, 5).unwrap();
        assert_eq!((q5.p, q5.t), (4, 1));
        assert!((q5.predicted_exponent - 0.5).abs() < 1e-12);
        let q6 = plan_strategy(n, m, 6).unwrap();
        assert_eq!((q6.strategy, q6.p, q6.t), (Strategy::Nested, 4, 2));
        assert!((q6.predicted_exponent - 0.5625).abs() < 1e-12);
        assert_eq!(plan_strategy(n, m, 3).unwrap().strategy, Strategy::Triangle15);
        assert!(plan_strategy(n, m, 2).is_err());
    }

    #[test]
    fn nested_constraint() {
        assert!(nested_feasible(3, 2));
        assert!(!nested_feasible(3, 3));
        assert!(nested_feasible(5, 3));
        assert!(plan_for(64, 100, 6, Some(Strategy::Triangle15)).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
    }

    proptest! {
        #[test]
        fn greedy_batches_cover_and_fill(degrees in prop::collection::vec(0u64..40, 1..300), target in 1u64..200) {
            let b = DegreeBatching::greedy(&degrees, target);
            let mut next = 0u32;
            for (i, r) in b.batches.iter().enumerate() {
                prop_assert_eq!(r.start, next);
                next = r.end;
                let sum: u64 = degrees[r.start as usize..r.end as usize].iter().sum();
                prop_assert_eq!(sum, b.sums[i]);
                if i + 1 < b.len() {
                    let max_deg = degrees.iter().copied().max().unwrap();
                    prop_assert!(sum >= target && sum <= target + max_deg);
                }
            }
            prop_assert_eq!(next as usize, degrees.len());
        }
    }
}
