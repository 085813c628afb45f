use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use xbar_bench::{signed_matrix, synthetic_dataset, unit_values};
use xbar_core::linalg::pseudoinverse;
use xbar_core::stats::two_sample_t_test;
use xbar_core::{CrossbarInstance, DatasetKind, LinearLayerModel, Pairing, TrainConfig};

const N: usize = 784;
const M: usize = 10;

fn forward(c: &mut Criterion) {
    let w = signed_matrix(M, N, 0.05, 1);
    let u = unit_values(N, 2);
    let model = LinearLayerModel::new(w, Pairing::SoftmaxCe).unwrap();
    let xbar = CrossbarInstance::compile(&model).unwrap();
    c.bench_function("matvec_10x784", |b| {
        b.iter(|| model.weights().matvec(black_box(&u)).unwrap())
    });
    c.bench_function("model_forward_softmax", |b| {
        b.iter(|| model.forward(black_box(&u)).unwrap())
    });
    c.bench_function("crossbar_forward", |b| b.iter(|| xbar.forward(black_box(&u)).unwrap()));
    c.bench_function("crossbar_total_current", |b| {
        b.iter(|| xbar.total_current(black_box(&u)).unwrap())
    });
    c.bench_function("input_sensitivity", |b| {
        let t = xbar_core::model::one_hot(3, M);
        b.iter(|| model.input_sensitivity(black_box(&u), &t).unwrap())
    });
}

fn linalg(c: &mut Criterion) {
    let mut g = c.benchmark_group("pseudoinverse");
    g.sample_size(10);
    for q in [100, 784] {
        let a = signed_matrix(q, N, 1.0, q as u64);
        g.bench_function(format!("{q}x{N}"), |b| b.iter(|| pseudoinverse(black_box(&a)).unwrap()));
    }
    g.finish();
}

fn training(c: &mut Criterion) {
    let ds = synthetic_dataset(2048, N, M, 3);
    let mut g = c.benchmark_group("train_epoch_2048");
    g.sample_size(10);
    for pairing in [Pairing::LinearMse, Pairing::SoftmaxCe] {
        let mut cfg = TrainConfig::default_for(DatasetKind::Mnist, pairing, 0);
        cfg.epochs = 1;
        g.bench_function(pairing.as_str(), |b| {
            b.iter_batched(
                || LinearLayerModel::zeros(pairing, M, N),
                |m| m.train(&ds, &cfg).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    g.finish();
}

fn stats(c: &mut Criterion) {
    let a = unit_values(10, 4);
    let b = unit_values(10, 5);
    c.bench_function("pooled_t_test_10v10", |bch| {
        bch.iter(|| two_sample_t_test(black_box(&a), black_box(&b)).unwrap())
    });
}

criterion_group!(benches, forward, linalg, training, stats);
criterion_main!(benches);
