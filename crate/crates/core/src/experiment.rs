//! Experiment runs: one result row per (instance, trial), CSV in and out,
//! and log-log slope fits over the rows.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cliquedetect::{detect_with_plan, plan_for, predicted_exponent, DetectConfig, DetectionPlan, Strategy};
use crate::cliquelist::list_kp;
use crate::cycledetect::{detect_cycle, CycleConfig};
use crate::error::{Error, Result};
use crate::graph::{generate, oracle_cliques, oracle_clique_exists, oracle_has_cycle, GenSpec, Graph};
use crate::instance::{Input, SyntheticGraph};
use crate::netsim::{CliqueModel, CostLedger, Kind};
use crate::par;
use crate::qsearch::QuantumCostParams;
use crate::sizing::ceil_pow;

pub const CSV_HEADER: &str =
    "n,m,algo,params,rounds_total,rounds_route,rounds_broadcast,rounds_quantum,rounds_converge,queries,found,seed";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n: usize,
    pub m: u64,
    pub algo: String,
    pub params: String,
    pub rounds_total: u64,
    pub rounds_route: u64,
    pub rounds_broadcast: u64,
    pub rounds_quantum: u64,
    pub rounds_converge: u64,
    pub queries: u64,
    #[serde(serialize_with = "found_out", deserialize_with = "found_in")]
    pub found: Option<bool>,
    pub seed: u64,
}

fn found_out<S: Serializer>(found: &Option<bool>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match found {
        Some(b) => s.serialize_u8(u8::from(*b)),
        None => s.serialize_str(""),
    }
}

fn found_in<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<bool>, D::Error> {
    let text = String::deserialize(d)?;
    match text.as_str() {
        "" => Ok(None),
        "0" => Ok(Some(false)),
        "1" => Ok(Some(true)),
        other => Err(serde::de::Error::custom(format!("found must be 0, 1 or blank, got `{other}`"))),
    }
}

impl ResultRow {
    fn from_ledger(n: usize, m: u64, algo: &str, params: String, ledger: &CostLedger, queries: u64, found: Option<bool>, seed: u64) -> Self {
        ResultRow {
            n,
            m,
            algo: algo.to_string(),
            params,
            rounds_total: ledger.total(),
            rounds_route: ledger.total_of(Kind::Route),
            rounds_broadcast: ledger.total_of(Kind::Broadcast),
            rounds_quantum: ledger.total_of(Kind::Quantum),
            rounds_converge: ledger.total_of(Kind::Converge),
            queries,
            found,
            seed,
        }
    }

    /// Numeric column by name; `mu` is `m / n`.
    pub fn column(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "n" => self.n as f64,
            "m" => self.m as f64,
            "mu" => self.m as f64 / self.n.max(1) as f64,
            "rounds_total" => self.rounds_total as f64,
            "rounds_route" => self.rounds_route as f64,
            "rounds_broadcast" => self.rounds_broadcast as f64,
            "rounds_quantum" => self.rounds_quantum as f64,
            "rounds_converge" => self.rounds_converge as f64,
            "queries" => self.queries as f64,
            "seed" => self.seed as f64,
            other => return Err(Error::invalid("column", format!("no numeric column `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Clique {
        q: usize,
        strategy: Option<Strategy>,
        p: Option<usize>,
    },
    Cycle {
        ell: usize,
    },
    List {
        p: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Full,
    CostOnly,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "cost-only" => Ok(Mode::CostOnly),
            other => Err(Error::invalid("mode", format!("expected full or cost-only, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Source {
    Graph(Arc<Graph>),
    /// `n` is replaced by each entry of the n-list when one is given.
    Gen(GenSpec),
    /// Sizes only; edge counts from the m-list or `ceil(n^m_exp)`, complete
    /// graphs when neither is given (clique tasks only).
    Synthetic,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub task: Task,
    pub mode: Mode,
    pub source: Source,
    pub n_list: Vec<usize>,
    pub m_list: Vec<u64>,
    pub m_exp: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub params: QuantumCostParams,
    pub packing: bool,
    /// Leader eccentricity of synthetic CONGEST networks.
    pub eccentricity: u64,
}

impl ExperimentConfig {
    pub fn new(task: Task, mode: Mode, source: Source) -> Self {
        ExperimentConfig {
            task,
            mode,
            source,
            n_list: Vec::new(),
            m_list: Vec::new(),
            m_exp: None,
            trials: 1,
            seed: 0,
            params: QuantumCostParams::default(),
            packing: true,
            eccentricity: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        match (&self.mode, &self.source) {
            (Mode::CostOnly, Source::Synthetic) => {
                if self.n_list.is_empty() {
                    return Err(Error::invalid("n-list", "cost-only mode needs node counts"));
                }
                if self.m_list.is_empty() && self.m_exp.is_none() && matches!(self.task, Task::Cycle { .. }) {
                    return Err(Error::invalid("m-list", "cost-only cycle runs need edge counts (--m-list or --m-exp)"));
                }
            }
            (Mode::CostOnly, _) => return Err(Error::invalid("mode", "cost-only mode takes synthetic sizes, not a graph")),
            (Mode::Full, Source::Synthetic) => return Err(Error::invalid("graph", "full mode needs --graph or --gen")),
            _ => {}
        }
        match self.task {
            Task::Clique { q, .. } if q < 3 => Err(Error::invalid("q", "clique size must be >= 3")),
            Task::List { p } if p < 2 => Err(Error::invalid("p", "clique size must be >= 2")),
            Task::Cycle { ell } if ell < 4 => Err(Error::invalid("ell", "cycle length must be >= 4")),
            _ => Ok(()),
        }
    }
}

enum Instance {
    Graph(Arc<Graph>),
    Synthetic(SyntheticGraph),
}

struct Job {
    instance: Instance,
    seed: u64,
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(usize, u64, u64)> {
    // (n, m, trial) for synthetic runs, (n, 0, trial) otherwise.
    let mut out = Vec::new();
    match &cfg.source {
        Source::Synthetic => {
            for &n in &cfg.n_list {
                let ms = match cfg.m_exp {
                    Some(e) => vec![ceil_pow(n as u64, e)],
                    None if cfg.m_list.is_empty() => vec![(n as u64) * (n as u64).saturating_sub(1) / 2],
                    None => cfg.m_list.clone(),
                };
                for m in ms {
                    for t in 0..cfg.trials {
                        out.push((n, m, t));
                    }
                }
            }
        }
        Source::Graph(g) => (0..cfg.trials).for_each(|t| out.push((g.n(), 0, t))),
        Source::Gen(spec) => {
            let ns = if cfg.n_list.is_empty() { vec![spec.n] } else { cfg.n_list.clone() };
            for n in ns {
                for t in 0..cfg.trials {
                    out.push((n, 0, t));
                }
            }
        }
    }
    out
}

fn materialize(cfg: &ExperimentConfig, n: usize, m: u64, trial: u64) -> Result<Job> {
    let seed = cfg.seed.wrapping_add(trial);
    let instance = match &cfg.source {
        Source::Synthetic => {
            Instance::Synthetic(SyntheticGraph::new(n, m)?.with_eccentricity(cfg.eccentricity))
        }
        Source::Graph(g) => Instance::Graph(Arc::clone(g)),
        Source::Gen(spec) => {
            let spec = GenSpec {
                n,
                seed: spec.seed.wrapping_add(trial),
                ..spec.clone()
            };
            Instance::Graph(Arc::new(generate(&spec)?))
        }
    };
    Ok(Job { instance, seed })
}

fn clique_plan(n: usize, m: u64, q: usize, strategy: Option<Strategy>, p: Option<usize>) -> Result<DetectionPlan> {
    let Some(p) = p else {
        return plan_for(n, m, q, strategy);
    };
    if p < 2 || p >= q {
        return Err(Error::invalid("p", format!("need 2 <= p < q = {q}, got {p}")));
    }
    let t = q - p;
    let strategy = match strategy {
        Some(s) => s,
        None => plan_for(n, m, q, None)?.strategy,
    };
    let e = predicted_exponent(strategy, n, m, p, t)
        .ok_or_else(|| Error::invalid("t", format!("{strategy} cannot run with p = {p}, t = {t}")))?;
    Ok(DetectionPlan {
        q,
        strategy,
        p,
        t,
        predicted_exponent: e,
    })
}

fn run_job(cfg: &ExperimentConfig, job: &Job) -> Result<ResultRow> {
    let input = match &job.instance {
        Instance::Graph(g) => Input::Graph(g),
        Instance::Synthetic(s) => Input::Synthetic(s),
    };
    let (n, m) = (input.n(), input.m());
    let mut ledger = CostLedger::new();
    let (algo, params, queries, found) = match &cfg.task {
        Task::Clique { q, strategy, p } => {
            let plan = clique_plan(n, m, *q, *strategy, *p)?;
            let dcfg = DetectConfig {
                model: CliqueModel::new(n).with_packing(cfg.packing),
                params: cfg.params,
                seed: job.seed,
            };
            let d = detect_with_plan(input, &plan, &dcfg, &mut ledger)?;
            (plan.strategy.name().to_string(), plan.params_text(), d.queries, d.found)
        }
        Task::Cycle { ell } => {
            let ccfg = CycleConfig {
                params: cfg.params,
                seed: job.seed,
            };
            let d = detect_cycle(input, *ell, &ccfg, &mut ledger)?;
            ("cycle".to_string(), format!("ell={ell}"), d.queries, d.found)
        }
        Task::List { p } => {
            let model = CliqueModel::new(n).with_packing(cfg.packing);
            let inv = list_kp(input, *p, &model, &mut ledger, None)?;
            let found = input.graph().map(|_| inv.total_listed() > 0);
            ("list".to_string(), format!("p={p}"), 0, found)
        }
    };
    Ok(ResultRow::from_ledger(n, m, &algo, params, &ledger, queries, found, job.seed))
}

/// One row per instance and trial, ordered by `(n, seed)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let results = par::map(jobs(cfg), |(n, m, t)| -> Result<ResultRow> {
        let job = materialize(cfg, n, m, t)?;
        run_job(cfg, &job)
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n, r.seed));
    Ok(rows)
}

/// A row checked against brute force.
#[derive(Clone, Debug, PartialEq)]
pub struct Verified {
    pub row: ResultRow,
    pub expected: bool,
}

impl Verified {
    pub fn agrees(&self) -> bool {
        self.row.found == Some(self.expected)
    }
}

/// Full-mode runs paired with the brute-force answer. Listing rows agree
/// only when the listed union equals the oracle's clique set.
pub fn verify_experiment(cfg: &ExperimentConfig) -> Result<Vec<Verified>> {
    if cfg.mode != Mode::Full {
        return Err(Error::invalid("mode", "verify runs in full mode"));
    }
    cfg.validate()?;
    let results = par::map(jobs(cfg), |(n, m, t)| -> Result<Verified> {
        let job = materialize(cfg, n, m, t)?;
        let Instance::Graph(g) = &job.instance else {
            unreachable!("full mode materializes graphs")
        };
        let mut row = run_job(cfg, &job)?;
        let expected = match &cfg.task {
            Task::Clique { q, .. } => oracle_clique_exists(g, *q)?,
            Task::Cycle { ell } => oracle_has_cycle(g, *ell),
            Task::List { p } => {
                let truth = oracle_cliques(g, *p)?;
                let inv = list_kp(Input::Graph(g), *p, &CliqueModel::new(g.n()), &mut CostLedger::new(), None)?;
                if inv.union() != truth {
                    row.found = Some(truth.is_empty());
                }
                !truth.is_empty()
            }
        };
        Ok(Verified { row, expected })
    });
    let mut out = results.into_iter().collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|v| (v.row.n, v.row.seed));
    Ok(out)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header `{}`", header.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Least-squares slope of `log2 y` against `log2 x`.
pub fn fit_slope_xy(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::invalid("rows", format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::invalid("rows", format!("log-log fit needs positive values, got ({x}, {y})")));
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.log2(), y.log2())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rows", "x values are all equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

pub fn fit_slope(rows: &[ResultRow], x_col: &str, y_col: &str) -> Result<f64> {
    let points = rows
        .iter()
        .map(|r| Ok((r.column(x_col)?, r.column(y_col)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_slope_xy(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GenKind;

    fn pow_ns() -> Vec<usize> {
        (10..=16).map(|e| 1usize << e).collect()
    }

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<(f64, f64)> = pow_ns().iter().map(|&n| (n as f64, (n as f64).powf(0.2))).collect();
        assert!((fit_slope_xy(&pts).unwrap() - 0.2).abs() < 1e-9);
        let flat: Vec<(f64, f64)> = pow_ns().iter().map(|&n| (n as f64, 7.0)).collect();
        assert!(fit_slope_xy(&flat).unwrap().abs() < 1e-12);
        assert!(fit_slope_xy(&[(1.0, 1.0), (2.0, 0.0), (4.0, 1.0)]).is_err());
        assert!(fit_slope_xy(&pts[..2]).is_err());
    }

    #[test]
    fn planted_k5_row() {
        let mut cfg = ExperimentConfig::new(
            Task::Clique { q: 5, strategy: None, p: None },
            Mode::Full,
            Source::Gen(GenSpec::planted_clique(64, 5, 0.1, 1)),
        );
        cfg.seed = 1;
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].found, Some(true));
    }

    #[test]
    fn triangle_sweep_is_monotone() {
        let mut cfg = ExperimentConfig::new(
            Task::Clique { q: 3, strategy: Some(Strategy::Triangle15), p: None },
            Mode::CostOnly,
            Source::Synthetic,
        );
        cfg.n_list = pow_ns();
        cfg.m_exp = Some(1.5);
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 7);
        assert!(rows.windows(2).all(|w| w[0].rounds_total <= w[1].rounds_total));
        assert!(rows.iter().all(|r| r.found.is_none()));
        let slope = fit_slope(&rows, "n", "rounds_total").unwrap();
        assert!((0.15..=0.25).contains(&slope), "{slope}");
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = ExperimentConfig::new(Task::Cycle { ell: 5 }, Mode::Full, Source::Gen(GenSpec::new(GenKind::Cycle, 10)));
        cfg.trials = 3;
        let mut rows = run_experiment(&cfg).unwrap();
        rows.push(ResultRow {
            found: None,
            params: "q=4;p=2;t=2".into(),
            ..rows[0].clone()
        });
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(read_rows(text.as_bytes()).unwrap(), rows);
        for r in &rows {
            assert_eq!(r.rounds_total, r.rounds_route + r.rounds_broadcast + r.rounds_quantum + r.rounds_converge);
        }
    }

    #[test]
    fn verify_rows_agree() {
        let mut cfg = ExperimentConfig::new(
            Task::Clique { q: 4, strategy: None, p: None },
            Mode::Full,
            Source::Gen(GenSpec::gnp(40, 0.3, 0)),
        );
        cfg.trials = 10;
        let out = verify_experiment(&cfg).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(Verified::agrees));
    }

    #[test]
    fn config_errors_name_the_field() {
        let mut cfg = ExperimentConfig::new(Task::Cycle { ell: 4 }, Mode::CostOnly, Source::Synthetic);
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument { field: "n-list", .. })));
        cfg.n_list = vec![64];
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument { field: "m-list", .. })));
        let cfg = ExperimentConfig::new(Task::Cycle { ell: 4 }, Mode::Full, Source::Synthetic);
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument { field: "graph", .. })));
        let mut cfg = ExperimentConfig::new(
            Task::Clique { q: 4, strategy: Some(Strategy::Plus1), p: Some(2) },
            Mode::Full,
            Source::Gen(GenSpec::gnp(40, 0.3, 0)),
        );
        cfg.trials = 1;
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument { field: "t", .. })));
    }
}
