use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qcc::cliquedetect::Strategy;
use qcc::experiment::{
    fit_slope, read_rows, run_experiment, verify_experiment, write_rows, ExperimentConfig, Mode, ResultRow, Source, Task,
};
use qcc::graph::{generate, load_graph, write_edge_list, GenSpec};
use qcc::qsearch::QuantumCostParams;

#[derive(Parser)]
#[command(name = "qcc", version, about = "Round-level simulator for quantum congested clique and CONGEST algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list.
    Gen {
        #[arg(long, value_name = "kind,n,prob,size,seed")]
        gen: GenSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect a q-clique.
    DetectClique(CliqueArgs),
    /// Detect an ell-cycle.
    DetectCycle(CycleArgs),
    /// List every p-clique.
    List(ListArgs),
    /// Run any task over an n-list (and m-list in cost-only mode).
    Sweep(SweepArgs),
    /// Run in full mode and compare every row with brute force.
    Verify(SweepArgs),
    /// Least-squares slope of log2(y) against log2(x) over a result CSV.
    Fit(FitArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, conflicts_with = "gen")]
    graph: Option<PathBuf>,
    /// Generator spec; `n` is overridden by --n-list.
    #[arg(long, value_name = "kind,n,prob,size,seed")]
    gen: Option<GenSpec>,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Edge counts for cost-only runs.
    #[arg(long, value_delimiter = ',')]
    m_list: Vec<u64>,
    /// Cost-only edge count `ceil(n^x)`, instead of --m-list.
    #[arg(long, conflicts_with = "m_list")]
    m_exp: Option<f64>,
    /// Leader eccentricity of cost-only CONGEST networks.
    #[arg(long, default_value_t = 1)]
    ecc: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    c_grover: f64,
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long, default_value_t = 0.0)]
    fail_prob: f64,
    #[arg(long, value_enum, default_value = "on")]
    packing: Switch,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print rows as JSON instead of CSV on standard output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CliqueArgs {
    #[arg(long)]
    q: usize,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct CycleArgs {
    #[arg(long)]
    ell: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct ListArgs {
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Column name; `mu` is m / n.
    #[arg(long, default_value = "n")]
    x_col: String,
    #[arg(long, default_value = "rounds_total")]
    y_col: String,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    CostOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Clique,
    Cycle,
    List,
}

fn clique_task(q: usize, strategy: Option<Strategy>, p: Option<usize>, t: Option<usize>) -> anyhow::Result<Task> {
    let p = match (p, t) {
        (Some(p), Some(t)) if p + t != q => bail!(qcc::Error::InvalidArgument {
            field: "t",
            msg: format!("p + t = {} but q = {q}", p + t),
        }),
        (Some(p), _) => Some(p),
        (None, Some(t)) => Some(q.checked_sub(t).filter(|&p| p >= 2).ok_or_else(|| qcc::Error::InvalidArgument {
            field: "t",
            msg: format!("t = {t} leaves no base clique for q = {q}"),
        })?),
        (None, None) => None,
    };
    Ok(Task::Clique { q, strategy, p })
}

fn missing(field: &'static str, algo: &str) -> qcc::Error {
    qcc::Error::InvalidArgument {
        field,
        msg: format!("--algo {algo} needs --{field}"),
    }
}

fn sweep_task(a: &SweepArgs) -> anyhow::Result<Task> {
    Ok(match a.algo {
        Algo::Clique => clique_task(a.q.ok_or_else(|| missing("q", "clique"))?, a.strategy, a.p, a.t)?,
        Algo::Cycle => Task::Cycle {
            ell: a.ell.ok_or_else(|| missing("ell", "cycle"))?,
        },
        Algo::List => Task::List {
            p: a.p.ok_or_else(|| missing("p", "list"))?,
        },
    })
}

fn config(task: Task, r: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mode = match r.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::CostOnly => Mode::CostOnly,
    };
    let source = match (&r.graph, &r.gen) {
        (Some(path), _) => {
            Source::Graph(Arc::new(load_graph(path).with_context(|| format!("loading {}", path.display()))?))
        }
        (None, Some(spec)) => Source::Gen(spec.clone()),
        (None, None) => Source::Synthetic,
    };
    let mut cfg = ExperimentConfig::new(task, mode, source);
    cfg.n_list = r.n_list.clone();
    cfg.m_list = r.m_list.clone();
    cfg.m_exp = r.m_exp;
    cfg.trials = r.trials;
    cfg.seed = r.seed;
    cfg.params = QuantumCostParams {
        c_grover: r.c_grover,
        reps: r.reps,
        fail_prob: r.fail_prob,
    };
    cfg.packing = matches!(r.packing, Switch::On);
    cfg.eccentricity = r.ecc;
    Ok(cfg)
}

fn row_json(r: &ResultRow) -> Value {
    json!({
        "n": r.n,
        "m": r.m,
        "algo": r.algo,
        "params": r.params,
        "rounds_total": r.rounds_total,
        "rounds_route": r.rounds_route,
        "rounds_broadcast": r.rounds_broadcast,
        "rounds_quantum": r.rounds_quantum,
        "rounds_converge": r.rounds_converge,
        "queries": r.queries,
        "found": r.found,
        "seed": r.seed,
    })
}

fn emit(rows: &[ResultRow], r: &RunArgs) -> anyhow::Result<()> {
    if let Some(path) = &r.out {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_rows(rows, BufWriter::new(file))?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if r.json {
        let v: Vec<Value> = rows.iter().map(row_json).collect();
        serde_json::to_writer_pretty(&mut out, &v)?;
        writeln!(out)?;
    } else if r.out.is_none() {
        write_rows(rows, &mut out)?;
    }
    Ok(())
}

/// Exit status on success: 0, or 3 when verified rows disagree with brute force.
fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Gen { gen, out } => {
            let g = generate(&gen)?;
            match out {
                Some(path) => write_edge_list(&g, BufWriter::new(File::create(&path)?))?,
                None => write_edge_list(&g, io::stdout().lock())?,
            }
        }
        Command::DetectClique(a) => {
            let cfg = config(clique_task(a.q, a.strategy, a.p, a.t)?, &a.run)?;
            emit(&run_experiment(&cfg)?, &a.run)?;
        }
        Command::DetectCycle(a) => {
            let cfg = config(Task::Cycle { ell: a.ell }, &a.run)?;
            emit(&run_experiment(&cfg)?, &a.run)?;
        }
        Command::List(a) => {
            let cfg = config(Task::List { p: a.p }, &a.run)?;
            emit(&run_experiment(&cfg)?, &a.run)?;
        }
        Command::Sweep(a) => {
            let cfg = config(sweep_task(&a)?, &a.run)?;
            emit(&run_experiment(&cfg)?, &a.run)?;
        }
        Command::Verify(a) => {
            let cfg = config(sweep_task(&a)?, &a.run)?;
            let checked = verify_experiment(&cfg)?;
            let rows: Vec<ResultRow> = checked.iter().map(|v| v.row.clone()).collect();
            emit(&rows, &a.run)?;
            let bad = checked.iter().filter(|v| !v.agrees()).count();
            eprintln!("{} of {} rows agree with brute force", checked.len() - bad, checked.len());
            if bad > 0 {
                eprintln!("error: {bad} rows disagree with brute force");
                return Ok(3);
            }
        }
        Command::Fit(a) => {
            let file = File::open(&a.csv).with_context(|| format!("opening {}", a.csv.display()))?;
            let rows = read_rows(file)?;
            let slope = fit_slope(&rows, &a.x_col, &a.y_col)?;
            if a.json {
                println!("{}", json!({"x_col": a.x_col, "y_col": a.y_col, "rows": rows.len(), "slope": slope}));
            } else {
                println!("{slope:.6}");
            }
        }
    }
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<qcc::Error>()) {
        Some(
            qcc::Error::Invariant(_)
            | qcc::Error::Protocol(_)
            | qcc::Error::InhomogeneousSetup { .. }
            | qcc::Error::InhomogeneousCheck { .. },
        ) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
