use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qcc::cycledetect::{detect_cycle, CycleConfig};
use qcc::graph::{generate, GenSpec, Graph};
use qcc::instance::Input;
use qcc::netsim::CostLedger;
use qcc::par::{map_parallel, map_sequential};

fn cycle_trials(graphs: &[Graph], seeds: Vec<u64>, parallel: bool) -> usize {
    let run = |seed: u64| {
        let g = &graphs[seed as usize % graphs.len()];
        let cfg = CycleConfig { seed, ..CycleConfig::default() };
        detect_cycle(Input::Graph(g), 5, &cfg, &mut CostLedger::new()).unwrap().is_found()
    };
    let found = if parallel { map_parallel(seeds, run) } else { map_sequential(seeds, run) };
    found.into_iter().filter(|&f| f).count()
}

fn bench_trials(c: &mut Criterion) {
    let graphs: Vec<Graph> = (0..8)
        .map(|s| generate(&GenSpec::planted_cycle(64, 5, 0.03, s)).unwrap())
        .collect();
    let mut group = c.benchmark_group("odd cycle trials");
    group.sample_size(10);
    for trials in [16u64, 64] {
        group.bench_with_input(BenchmarkId::new("sequential", trials), &trials, |b, &t| {
            b.iter(|| cycle_trials(&graphs, (0..t).collect(), false))
        });
        group.bench_with_input(BenchmarkId::new("parallel", trials), &trials, |b, &t| {
            b.iter(|| cycle_trials(&graphs, (0..t).collect(), true))
        });
    }
    group.finish();
}

fn bench_oracle_sweep(c: &mut Criterion) {
    let graphs: Vec<Graph> = (0..32).map(|s| generate(&GenSpec::gnp(48, 0.5, s)).unwrap()).collect();
    let count = |g: &Graph| qcc::graph::oracle_cliques(black_box(g), 5).unwrap().len();
    let mut group = c.benchmark_group("k5 listing oracle");
    group.bench_function("sequential", |b| b.iter(|| map_sequential(graphs.iter().collect(), count)));
    group.bench_function("parallel", |b| b.iter(|| map_parallel(graphs.iter().collect(), count)));
    group.finish();
}

criterion_group!(benches, bench_trials, bench_oracle_sweep);
criterion_main!(benches);
