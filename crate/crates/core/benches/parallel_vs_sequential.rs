//! Compares the data-parallel entry points against the always-sequential
//! fallback on the crate's hot loops. With the default `parallel` feature
//! the parallel side uses rayon; built with `--no-default-features` both
//! sides run sequentially and should coincide.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fpe_core::encoding::reference::reference_encode;
use fpe_core::labeling::lexicon_score;
use fpe_core::models::{DynamicFpe, DynamicFpeConfig};
use fpe_core::par;
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn bench_reference_encoding(c: &mut Criterion) {
    let titles: Vec<String> = (0..512)
        .map(|i| format!("headline {i} about topic {} and item {}", i % 13, i % 7))
        .collect();
    let mut group = c.benchmark_group("reference_encode_512_titles");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("parallel", 512), |b| {
        b.iter(|| par::map_collect(&titles, |t| reference_encode(t, 256).unwrap()))
    });
    group.bench_function(BenchmarkId::new("sequential", 512), |b| {
        b.iter(|| par::map_collect_seq(&titles, |t| reference_encode(t, 256).unwrap()))
    });
    group.finish();
}

fn bench_labeling(c: &mut Criterion) {
    let bodies: Vec<String> = (0..2048)
        .map(|i| {
            format!(
                "{} news about item {i} that people found {}",
                if i % 2 == 0 { "great wonderful" } else { "terrible awful" },
                if i % 3 == 0 { "not good" } else { "fine" }
            )
        })
        .collect();
    let mut group = c.benchmark_group("lexicon_score_2048_comments");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| par::map_collect(&bodies, |t| lexicon_score(t)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| par::map_collect_seq(&bodies, |t| lexicon_score(t)))
    });
    group.finish();
}

fn bench_model_forward(c: &mut Criterion) {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let model = DynamicFpe::init(
        DynamicFpeConfig {
            embed_dim: 96,
            hidden_dim: 64,
            classes: 3,
        },
        &mut rng,
    );
    let examples: Vec<(Vec<Array1<f64>>, Vec<Array1<f64>>, Array1<f64>)> = (0..64)
        .map(|_| {
            let mut track = |rng: &mut ChaCha20Rng| -> Vec<Array1<f64>> {
                (0..15)
                    .map(|_| Array1::from_shape_fn(96, |_| rng.gen_range(-1.0..1.0)))
                    .collect()
            };
            let reading = track(&mut rng);
            let writing = track(&mut rng);
            let target = Array1::from_shape_fn(96, |_| rng.gen_range(-1.0..1.0));
            (reading, writing, target)
        })
        .collect();

    let mut group = c.benchmark_group("dynamic_forward_64_examples");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            par::map_collect(&examples, |(r, w, t)| {
                model.forward(r, w, t).unwrap().final_logits.sum()
            })
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            par::map_collect_seq(&examples, |(r, w, t)| {
                model.forward(r, w, t).unwrap().final_logits.sum()
            })
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_reference_encoding,
    bench_labeling,
    bench_model_forward
);
criterion_main!(benches);
