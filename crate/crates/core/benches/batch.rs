use std::fs;
use std::path::Path;

use cdiag_core::batch;
use cdiag_core::settings::CompileOptions;
use cdiag_core::styles::EmMetrics;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn corpus() -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files.iter().filter(|p| p.extension().is_some_and(|e| e == "kd")).map(|p| fs::read_to_string(p).unwrap()).collect()
}

fn batch_compile(c: &mut Criterion) {
    let base = corpus();
    let options = CompileOptions::default();
    let metrics = EmMetrics::default();
    let mut group = c.benchmark_group("batch_compile");
    for copies in [1, 8, 32] {
        let sources: Vec<&str> = base.iter().map(String::as_str).cycle().take(base.len() * copies).collect();
        group.throughput(Throughput::Elements(sources.len() as u64));
        group.bench_with_input(BenchmarkId::new("sequential", sources.len()), &sources, |b, s| {
            b.iter(|| batch::compile_all_sequential(s, &options, &metrics))
        });
        // Identical to sequential when built without the `parallel` feature.
        group.bench_with_input(BenchmarkId::new("parallel", sources.len()), &sources, |b, s| {
            b.iter(|| batch::compile_all(s, &options, &metrics))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_compile);
criterion_main!(benches);
