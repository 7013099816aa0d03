use std::hint::black_box;

use anam_bench::{desk_specs, inputs, synthetic};
use anam_core::distributions::DistributionSpec;
use anam_core::lattice::{build_constraints, dykstra_project, LatticeParams, Monotonicity};
use anam_core::mlp::{Activation, MlpConfig, MlpParams};
use anam_core::model::AnamModel;
use anam_core::train::Objective;
use criterion::{criterion_group, criterion_main, Criterion};

fn mlp(c: &mut Criterion) {
    for (dim, layers, width) in [(1, 2, 20), (2, 4, 64)] {
        let net = MlpParams::init_glorot(&MlpConfig {
            input_dim: dim,
            hidden_layers: layers,
            first_hidden_width: width,
            activation: Activation::default(),
            seed: 1,
        })
        .unwrap();
        let x = inputs(1000, dim);
        let upstream = vec![1.0; 1000];
        c.bench_function(&format!("mlp_forward_{dim}x{layers}x{width}_b1000"), |b| {
            b.iter(|| net.forward_batch(black_box(x.view())).unwrap())
        });
        let (_, cache) = net.forward_batch(x.view()).unwrap();
        let mut grad = vec![0.0; net.num_params()];
        c.bench_function(&format!("mlp_backward_{dim}x{layers}x{width}_b1000"), |b| {
            b.iter(|| net.backward_batch(black_box(&cache), &upstream, &mut grad, false))
        });
    }
}

fn dykstra(c: &mut Criterion) {
    let sizes = vec![10, 10];
    let mono = vec![Monotonicity::Decreasing, Monotonicity::Increasing];
    let ramp = LatticeParams::ramp(sizes.clone(), mono.clone()).unwrap();
    let constraints = build_constraints(&ramp);
    // a saddle violating both directions
    let start: Vec<f64> = (0..100)
        .map(|k| {
            let (i, j) = ((k / 10) as f64, (k % 10) as f64);
            ((i - 4.5) * (j - 4.5)).sin()
        })
        .collect();
    for k in [10, 1000] {
        c.bench_function(&format!("dykstra_10x10_k{k}"), |b| {
            b.iter(|| {
                let mut v = start.clone();
                dykstra_project(black_box(&mut v), &constraints, k, 0.0)
            })
        });
    }
}

fn objective(c: &mut Criterion) {
    let data = synthetic(1000);
    let model = AnamModel::build(desk_specs(), &data, DistributionSpec::gamma(1.0), 3).unwrap();
    let rows: Vec<usize> = (0..1000).collect();
    for (name, omega_smooth, omega_mc) in [("nll", 0.0, 0.0), ("penalised", 1e-6, 0.1)] {
        let obj = Objective::new(&model, omega_smooth, omega_mc, 1000).unwrap();
        c.bench_function(&format!("objective_{name}_b1000"), |b| {
            b.iter(|| obj.evaluate(black_box(&model), &data, &rows).unwrap())
        });
    }
}

criterion_group!(benches, mlp, dykstra, objective);
criterion_main!(benches);
