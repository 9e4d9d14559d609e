use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fermionic_rc::fock::ModelVariant;
use fermionic_rc::parallel::Execution;
use fermionic_rc::scenario::{run_benchmark_set, run_demon_sweep, ScenarioConfig, Sweep, SweepAxis};
use fermionic_rc::spectral::{iterate_chain, MappingOptions, SpectralDensity};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn workers(exec: Execution) -> Option<usize> {
    match exec {
        Execution::Sequential => Some(1),
        _ => None,
    }
}

fn demon_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("demon_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ScenarioConfig {
            model: ModelVariant::Model2,
            sweep: Some(Sweep {
                axis: SweepAxis::GammaS,
                from: 1e-6,
                to: 1e-3,
                points: 8,
            }),
            workers: workers(exec),
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_demon_sweep(&cfg).unwrap()));
    }
    group.finish();
}

fn set_benchmark(c: &mut Criterion) {
    let mut group = c.benchmark_group("benchmark_set");
    group.sample_size(10);
    for (name, exec) in MODES {
        let mut cfg = ScenarioConfig {
            workers: workers(exec),
            ..Default::default()
        };
        cfg.benchmark.points = 8;
        cfg.benchmark.variants = false;
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_benchmark_set(&cfg).unwrap()));
    }
    group.finish();
}

fn chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain");
    group.sample_size(10);
    let sd = SpectralDensity::flat(1.0, -1.0, 1.0);
    for (name, exec) in MODES {
        let opts = MappingOptions {
            execution: exec,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| iterate_chain(&sd, 4, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, demon_sweep, set_benchmark, chain);
criterion_main!(benches);
