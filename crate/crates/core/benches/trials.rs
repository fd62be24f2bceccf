use std::hint::black_box;

use cogrelay::arp::InterRelayMode;
use cogrelay::sim::{run_arp_trials, run_trials_with};
use cogrelay::{ClusteringMode, Execution, NetworkConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn half_duplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("half_duplex_trials");
    group.sample_size(10);
    for n in [100usize, 1000] {
        let cfg = NetworkConfig { n, ..NetworkConfig::default() };
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| run_trials_with(black_box(cfg), ClusteringMode::Fixed, 5.0, 200, 1, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn alternating(c: &mut Criterion) {
    let mut group = c.benchmark_group("arp_cycles");
    group.sample_size(10);
    let cfg = NetworkConfig { n: 200, ..NetworkConfig::default() };
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| run_arp_trials(black_box(&cfg), 3, 5.0, 50, 1, InterRelayMode::Cancel, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, half_duplex, alternating);
criterion_main!(benches);
