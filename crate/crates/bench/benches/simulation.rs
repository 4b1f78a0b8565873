use criterion::{criterion_group, criterion_main, Criterion};
use vlftbc_bench::bsc_pair;
use vlftbc_core::sim::{estimate, SchemeConfig};
use vlftbc_core::summarize;

fn simulation(c: &mut Criterion) {
    let bc = bsc_pair();
    let info = summarize(&bc, 1e-6).unwrap();
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    for block_len in [40usize, 80] {
        let cfg = SchemeConfig {
            rate: 0.1,
            block_len,
            trials: 500,
            messages: Some(256),
            seed: 1,
            ..SchemeConfig::default()
        };
        group.bench_function(format!("bsc pair L={block_len}"), |b| {
            b.iter(|| estimate(&bc, &info, &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulation);
criterion_main!(benches);
