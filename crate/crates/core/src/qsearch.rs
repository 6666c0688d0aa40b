//! Distributed Grover search at the round-cost level.
//!
//! Checkers are classical, so the engine decides the answer by ordinary
//! enumeration and charges rounds by the closed-form cost of the quantum
//! search. Charged rounds never depend on where, or whether, a marked
//! element exists.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::netsim::{CostLedger, Kind, Model};
use crate::seed::{rng_for, stage};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumCostParams {
    pub c_grover: f64,
    pub reps: u64,
    /// Chance that a search which would succeed reports nothing.
    pub fail_prob: f64,
}

impl Default for QuantumCostParams {
    fn default() -> Self {
        QuantumCostParams {
            c_grover: 1.0,
            reps: 1,
            fail_prob: 0.0,
        }
    }
}

impl QuantumCostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_grover > 0.0 && self.c_grover.is_finite()) {
            return Err(Error::invalid("c_grover", format!("{} is not positive", self.c_grover)));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.fail_prob) {
            return Err(Error::invalid("fail_prob", format!("{} is outside [0, 1)", self.fail_prob)));
        }
        Ok(())
    }
}

fn ceil_sqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while r * r < x {
        r += 1;
    }
    r
}

/// `ceil(c_grover * sqrt(domain_size))`, the number of oracle calls.
pub fn grover_iterations(domain_size: u64, params: &QuantumCostParams) -> u64 {
    if params.c_grover == 1.0 {
        ceil_sqrt(domain_size)
    } else {
        (params.c_grover * (domain_size as f64).sqrt()).ceil() as u64
    }
}

pub fn grover_cost(domain_size: u64, query_rounds: u64, params: &QuantumCostParams) -> u64 {
    params.reps * grover_iterations(domain_size, params) * query_rounds
}

/// Cost of a `k`-level nested search:
/// `reps * g(X1) * (s1 + g(X2) * (s2 + ... + g(Xk) * (sk + c)))`,
/// with `g(X) = ceil(c_grover * sqrt(X))`. `setup_costs` may omit `sk`.
pub fn nested_cost_predict(
    sizes: &[u64],
    setup_costs: &[u64],
    check_cost: u64,
    params: &QuantumCostParams,
) -> u64 {
    let k = sizes.len();
    assert!(k >= 1, "a nested search needs at least one level");
    assert!(
        setup_costs.len() == k || setup_costs.len() + 1 == k,
        "expected {k} or {} setup costs, got {}",
        k - 1,
        setup_costs.len()
    );
    let mut val = setup_costs.get(k - 1).copied().unwrap_or(0) + check_cost;
    for level in (0..k).rev() {
        val *= grover_iterations(sizes[level], params);
        if level > 0 {
            val += setup_costs[level - 1];
        }
    }
    params.reps * val
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub found: bool,
    pub witness: Option<Vec<u64>>,
    pub rounds_charged: u64,
    /// Checker invocations, classical bookkeeping only.
    pub queries_evaluated: u64,
}

/// Where a search is charged and how it is driven.
#[derive(Clone, Debug)]
pub struct SearchContext {
    pub phase: String,
    pub model: Model,
    pub seed: u64,
    /// Measure costs on the first index path only and skip the answer.
    pub cost_only: bool,
}

impl SearchContext {
    pub fn new(phase: impl Into<String>, model: Model, seed: u64) -> Self {
        SearchContext {
            phase: phase.into(),
            model,
            seed,
            cost_only: false,
        }
    }

    pub fn cost_only(mut self, on: bool) -> Self {
        self.cost_only = on;
        self
    }
}

fn inject_failure(found: bool, params: &QuantumCostParams, ctx: &SearchContext) -> bool {
    found
        && !(params.fail_prob > 0.0
            && rng_for(ctx.seed, stage::SEARCH_FAIL, 0).random::<f64>() < params.fail_prob)
}

/// Single-level search over `0..domain_size`.
pub fn run_search<F>(
    domain_size: u64,
    mut checker: F,
    ledger: &mut CostLedger,
    params: &QuantumCostParams,
    ctx: &SearchContext,
) -> Result<SearchOutcome>
where
    F: FnMut(u64, &mut CostLedger) -> Result<bool>,
{
    params.validate()?;
    let mut query_cost: Option<u64> = None;
    let mut queries = 0;
    let mut hit = None;
    let last = if ctx.cost_only { domain_size.min(1) } else { domain_size };
    for x in 0..last {
        let mut scratch = CostLedger::new();
        let marked = checker(x, &mut scratch)?;
        queries += 1;
        let cost = scratch.total();
        match query_cost {
            None => query_cost = Some(cost),
            Some(first) if first != cost => {
                return Err(Error::InhomogeneousCheck { first, other: cost })
            }
            _ => {}
        }
        if marked && !ctx.cost_only {
            hit = Some(x);
            break;
        }
    }
    if let Some(x) = hit {
        if !checker(x, &mut CostLedger::new())? {
            return Err(Error::Invariant(format!("search witness {x} did not re-verify")));
        }
    }
    let rounds = grover_cost(domain_size, query_cost.unwrap_or(0), params);
    ledger.charge(ctx.phase.clone(), ctx.model, Kind::Quantum, rounds);
    let found = inject_failure(hit.is_some(), params, ctx);
    Ok(SearchOutcome {
        found,
        witness: hit.filter(|_| found).map(|x| vec![x]),
        rounds_charged: rounds,
        queries_evaluated: queries,
    })
}

/// A search over `X1 x ... x Xk` whose level-`l` setup runs once the first
/// `l` indices are fixed and hands its result down to deeper levels.
pub trait NestedSearch {
    type State;

    fn sizes(&self) -> Vec<u64>;

    fn root(&mut self) -> Self::State;

    /// Setup for `level` (0-based) at index `x`. Its charge is the level's cost.
    fn setup(
        &mut self,
        level: usize,
        x: u64,
        parent: &Self::State,
        ledger: &mut CostLedger,
    ) -> Result<Self::State>;

    fn check(&mut self, state: &Self::State, ledger: &mut CostLedger) -> Result<bool>;
}

struct NestedRun {
    sizes: Vec<u64>,
    setup_costs: Vec<Option<u64>>,
    check_cost: Option<u64>,
    queries: u64,
    cost_only: bool,
}

impl NestedRun {
    fn record_setup(&mut self, level: usize, cost: u64) -> Result<()> {
        match self.setup_costs[level] {
            None => self.setup_costs[level] = Some(cost),
            Some(first) if first != cost => {
                return Err(Error::InhomogeneousSetup {
                    level: level + 1,
                    first,
                    other: cost,
                })
            }
            _ => {}
        }
        Ok(())
    }

    fn record_check(&mut self, cost: u64) -> Result<()> {
        match self.check_cost {
            None => self.check_cost = Some(cost),
            Some(first) if first != cost => return Err(Error::InhomogeneousCheck { first, other: cost }),
            _ => {}
        }
        Ok(())
    }

    fn descend<P: NestedSearch>(
        &mut self,
        problem: &mut P,
        level: usize,
        parent: &P::State,
        prefix: &mut Vec<u64>,
    ) -> Result<bool> {
        let last = if self.cost_only { 1 } else { self.sizes[level] };
        for x in 0..last {
            let mut scratch = CostLedger::new();
            let state = problem.setup(level, x, parent, &mut scratch)?;
            self.record_setup(level, scratch.total())?;
            prefix.push(x);
            let marked = if level + 1 == self.sizes.len() {
                let mut scratch = CostLedger::new();
                let marked = problem.check(&state, &mut scratch)?;
                self.queries += 1;
                self.record_check(scratch.total())?;
                marked && !self.cost_only
            } else {
                self.descend(problem, level + 1, &state, prefix)?
            };
            if marked {
                return Ok(true);
            }
            prefix.pop();
        }
        Ok(false)
    }
}

fn replay<P: NestedSearch>(problem: &mut P, witness: &[u64]) -> Result<bool> {
    let mut scratch = CostLedger::new();
    let mut state = problem.root();
    for (level, &x) in witness.iter().enumerate() {
        state = problem.setup(level, x, &state, &mut scratch)?;
    }
    problem.check(&state, &mut scratch)
}

/// Nested search; charges `nested_cost_predict` over the measured costs.
pub fn run_nested_search<P: NestedSearch>(
    problem: &mut P,
    ledger: &mut CostLedger,
    params: &QuantumCostParams,
    ctx: &SearchContext,
) -> Result<SearchOutcome> {
    params.validate()?;
    let sizes = problem.sizes();
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::invalid("sizes", format!("every level needs a nonempty domain, got {sizes:?}")));
    }
    let mut run = NestedRun {
        setup_costs: vec![None; sizes.len()],
        sizes: sizes.clone(),
        check_cost: None,
        queries: 0,
        cost_only: ctx.cost_only,
    };
    let root = problem.root();
    let mut prefix = Vec::with_capacity(sizes.len());
    let hit = run.descend(problem, 0, &root, &mut prefix)?;
    drop(root);
    if hit && !replay(problem, &prefix)? {
        return Err(Error::Invariant(format!("nested witness {prefix:?} did not re-verify")));
    }
    let setups: Vec<u64> = run.setup_costs.iter().map(|c| c.unwrap_or(0)).collect();
    let rounds = nested_cost_predict(&sizes, &setups, run.check_cost.unwrap_or(0), params);
    ledger.charge(ctx.phase.clone(), ctx.model, Kind::Quantum, rounds);
    let found = inject_failure(hit, params, ctx);
    Ok(SearchOutcome {
        found,
        witness: found.then_some(prefix),
        rounds_charged: rounds,
        queries_evaluated: run.queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> SearchContext {
        SearchContext::new("search", Model::Clique, 0)
    }

    #[test]
    fn grover_cost_examples() {
        let d = QuantumCostParams::default();
        assert_eq!(grover_cost(100, 3, &d), 30);
        assert_eq!(grover_cost(1, 5, &d), 5);
        let p = QuantumCostParams { c_grover: 2.0, reps: 3, ..d };
        assert_eq!(grover_cost(1024, 2, &p), 384);
        assert_eq!(grover_iterations(10, &d), 4);
    }

    #[test]
    fn nested_predict_examples() {
        let d = QuantumCostParams::default();
        assert_eq!(nested_cost_predict(&[16, 64], &[4, 0], 2, &d), 80);
        assert_eq!(nested_cost_predict(&[16, 64], &[4], 2, &d), 80);
        assert_eq!(nested_cost_predict(&[16, 256], &[16, 0], 1, &d), 128);
        assert_eq!(nested_cost_predict(&[10], &[3], 2, &d), grover_cost(10, 5, &d));
    }

    #[test]
    fn flat_search_charges_regardless_of_answer() {
        let d = QuantumCostParams::default();
        let checker = |marked: Option<u64>| {
            move |x: u64, l: &mut CostLedger| {
                l.charge("q", Model::Clique, Kind::Route, 3);
                Ok(Some(x) == marked)
            }
        };
        let mut ledger = CostLedger::new();
        let hit = run_search(10, checker(Some(7)), &mut ledger, &d, &ctx()).unwrap();
        assert!(hit.found);
        assert_eq!(hit.witness, Some(vec![7]));
        assert_eq!(hit.rounds_charged, 12);
        assert_eq!(hit.queries_evaluated, 8);
        let miss = run_search(10, checker(None), &mut ledger, &d, &ctx()).unwrap();
        assert!(!miss.found);
        assert_eq!(miss.rounds_charged, 12);
        assert_eq!(ledger.total(), 24);
        let sure_fail = QuantumCostParams { fail_prob: 0.999_999, ..d };
        let lost = run_search(10, checker(Some(7)), &mut ledger, &sure_fail, &ctx()).unwrap();
        assert!(!lost.found && lost.witness.is_none());
    }

    #[test]
    fn flat_search_rejects_uneven_queries() {
        let mut ledger = CostLedger::new();
        let err = run_search(
            4,
            |x, l: &mut CostLedger| {
                l.charge("q", Model::Clique, Kind::Route, x);
                Ok(false)
            },
            &mut ledger,
            &QuantumCostParams::default(),
            &ctx(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InhomogeneousCheck { first: 0, other: 1 }));
    }

    /// Product search where a tuple is marked iff it is in `marked`.
    struct Toy {
        sizes: Vec<u64>,
        setup_costs: Vec<u64>,
        check_cost: u64,
        marked: Vec<Vec<u64>>,
    }

    impl NestedSearch for Toy {
        type State = Vec<u64>;

        fn sizes(&self) -> Vec<u64> {
            self.sizes.clone()
        }

        fn root(&mut self) -> Vec<u64> {
            Vec::new()
        }

        fn setup(&mut self, level: usize, x: u64, parent: &Vec<u64>, l: &mut CostLedger) -> Result<Vec<u64>> {
            l.charge("setup", Model::Clique, Kind::Broadcast, self.setup_costs[level]);
            let mut s = parent.clone();
            s.push(x);
            Ok(s)
        }

        fn check(&mut self, state: &Vec<u64>, l: &mut CostLedger) -> Result<bool> {
            l.charge("check", Model::Clique, Kind::Converge, self.check_cost);
            Ok(self.marked.contains(state))
        }
    }

    #[test]
    fn two_level_toy() {
        let d = QuantumCostParams::default();
        let mut toy = Toy {
            sizes: vec![4, 4],
            setup_costs: vec![0, 0],
            check_cost: 1,
            marked: vec![vec![2, 3]],
        };
        let mut ledger = CostLedger::new();
        let out = run_nested_search(&mut toy, &mut ledger, &d, &ctx()).unwrap();
        assert_eq!(out.witness, Some(vec![2, 3]));
        assert_eq!(out.rounds_charged, 4);
        toy.marked.clear();
        let out = run_nested_search(&mut toy, &mut ledger, &d, &ctx()).unwrap();
        assert!(!out.found);
        assert_eq!(out.rounds_charged, 4);
        assert_eq!(out.queries_evaluated, 16);
    }

    #[test]
    fn cost_only_runs_one_path() {
        let mut toy = Toy {
            sizes: vec![16, 64],
            setup_costs: vec![4, 0],
            check_cost: 2,
            marked: vec![vec![0, 0]],
        };
        let out = run_nested_search(
            &mut toy,
            &mut CostLedger::new(),
            &QuantumCostParams::default(),
            &ctx().cost_only(true),
        )
        .unwrap();
        assert!(!out.found);
        assert_eq!(out.queries_evaluated, 1);
        assert_eq!(out.rounds_charged, 80);
    }

    struct Uneven;

    impl NestedSearch for Uneven {
        type State = ();

        fn sizes(&self) -> Vec<u64> {
            vec![2, 3]
        }

        fn root(&mut self) {}

        fn setup(&mut self, level: usize, x: u64, _: &(), l: &mut CostLedger) -> Result<()> {
            l.charge("s", Model::Clique, Kind::Route, if level == 1 { x } else { 1 });
            Ok(())
        }

        fn check(&mut self, _: &(), _: &mut CostLedger) -> Result<bool> {
            Ok(false)
        }
    }

    #[test]
    fn nested_rejects_uneven_setup() {
        let err = run_nested_search(
            &mut Uneven,
            &mut CostLedger::new(),
            &QuantumCostParams::default(),
            &ctx(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InhomogeneousSetup { level: 2, .. }));
    }

    proptest! {
        #[test]
        fn one_level_predict_is_grover_cost(x in 1u64..100_000, s in 0u64..50, c in 0u64..50,
                                            cg in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0]),
                                            reps in 1u64..5) {
            let p = QuantumCostParams { c_grover: cg, reps, fail_prob: 0.0 };
            prop_assert_eq!(nested_cost_predict(&[x], &[s], c, &p), grover_cost(x, s + c, &p));
        }

        #[test]
        fn nested_matches_brute_force_and_cost_ignores_answer(
            sizes in prop::collection::vec(1u64..7, 1..4),
            setups in prop::collection::vec(0u64..5, 3),
            check in 0u64..4,
            picks in prop::collection::vec(prop::collection::vec(0u64..7, 3), 0..4),
        ) {
            let k = sizes.len();
            let marked: Vec<Vec<u64>> = picks
                .into_iter()
                .map(|p| p.into_iter().take(k).zip(&sizes).map(|(x, s)| x % s).collect())
                .collect();
            let mut toy = Toy {
                sizes: sizes.clone(),
                setup_costs: setups[..k].to_vec(),
                check_cost: check,
                marked: marked.clone(),
            };
            let d = QuantumCostParams::default();
            let out = run_nested_search(&mut toy, &mut CostLedger::new(), &d, &ctx()).unwrap();
            prop_assert_eq!(out.found, !marked.is_empty());
            if let Some(w) = &out.witness {
                prop_assert!(marked.contains(w));
                prop_assert_eq!(Some(w), marked.iter().min());
            }
            prop_assert_eq!(out.rounds_charged, nested_cost_predict(&sizes, &setups[..k], check, &d));
        }
    }
}
