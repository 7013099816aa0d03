//! Fixtures shared by the benchmarks.

use anam_core::data::{simulate, Dataset, SyntheticConfig};
use anam_core::lattice::Monotonicity;
use anam_core::model::TermSpec;
use ndarray::Array2;

pub fn synthetic(n: usize) -> Dataset {
    simulate(&SyntheticConfig {
        n,
        seed: 11,
        ..SyntheticConfig::default()
    })
    .expect("valid synthetic config")
    .0
}

/// Eight MLP mains, a decreasing lattice for X3 and three pairs.
pub fn desk_specs() -> Vec<TermSpec> {
    let mut specs: Vec<TermSpec> = ["X1", "X2", "X4", "X5", "X6", "X7", "X8"]
        .iter()
        .map(|f| TermSpec::main_mlp(f, 2, 20))
        .collect();
    specs[0] = specs[0].clone().smooth();
    specs.push(TermSpec::main_lattice("X3", 10, 10, Monotonicity::Decreasing));
    specs.push(TermSpec::pair_mlp("X5", "X6", 4, 64));
    specs.push(TermSpec::pair_mlp("X7", "X8", 4, 64));
    specs.push(TermSpec::pair_lattice(
        "X3",
        "X4",
        10,
        10,
        [Monotonicity::Decreasing, Monotonicity::None],
    ));
    specs
}

/// `rows x dim` inputs spread over [-1, 1].
pub fn inputs(rows: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, dim), |(i, j)| {
        let t = ((i * 7919 + j * 104_729) % 1000) as f64 / 999.0;
        2.0 * t - 1.0
    })
}
