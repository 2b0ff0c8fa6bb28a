//! Sequential vs rayon execution: independent replications, and per-level
//! fan-out inside a single run.

use aptemper::config::{MixtureSource, SamplerConfig, TargetSpec};
use aptemper::parallel::Execution;
use aptemper::sampler::{replicate, run};
use aptemper::AdaptationMode;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn replications(c: &mut Criterion) {
    let mut config = SamplerConfig::new(TargetSpec::Mixture(MixtureSource::Canonical)).with_iterations(1000);
    config.thin = 1000;
    let mut group = c.benchmark_group("replicate_16");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| replicate(&config, 16, exec).unwrap())
        });
    }
    group.finish();
}

fn level_fan_out(c: &mut Criterion) {
    let mut group = c.benchmark_group("levels");
    group.sample_size(10);
    let cases = [
        ("mixture_d8_L8", {
            let mut cfg = SamplerConfig::new(TargetSpec::Mixture(MixtureSource::CanonicalHard)).with_iterations(500);
            cfg.levels = 8;
            cfg.adaptation = AdaptationMode::Cov;
            cfg
        }),
        ("ising_40x40_L10", {
            let mut cfg = SamplerConfig::new(TargetSpec::canonical_ising()).with_iterations(5000);
            cfg.levels = 10;
            cfg
        }),
    ];
    for (name, base) in cases {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut cfg = base.clone();
            cfg.thin = cfg.iterations;
            cfg.level_execution = exec;
            group.bench_function(BenchmarkId::new(name, format!("{exec:?}")), |b| b.iter(|| run(&cfg).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, replications, level_fan_out);
criterion_main!(benches);
