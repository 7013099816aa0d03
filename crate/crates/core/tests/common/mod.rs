#![allow(dead_code)]

pub mod oracles;

use anam_core::data::{simulate, Dataset, SyntheticConfig};
use anam_core::distributions::DistributionSpec;
use anam_core::lattice::Monotonicity;
use anam_core::model::{AnamModel, TermSpec};
use anam_core::train::Objective;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn small_data(n: usize, seed: u64) -> Dataset {
    simulate(&SyntheticConfig {
        n,
        dispersion: 1.0,
        seed,
        ..SyntheticConfig::default()
    })
    .unwrap()
    .0
}

/// Mains X1 (smooth mlp), X3 (decreasing lattice), X4 (mlp); pairs X3:X4
/// (lattice) and X1:X4 (mlp).
pub fn toy_specs(depth: usize, width: usize, vertices: usize) -> Vec<TermSpec> {
    vec![
        TermSpec::main_mlp("X1", depth, width).smooth(),
        TermSpec::main_lattice("X3", vertices, 5, Monotonicity::Decreasing),
        TermSpec::main_mlp("X4", depth, width),
        TermSpec::pair_lattice(
            "X3",
            "X4",
            vertices,
            4,
            [Monotonicity::Decreasing, Monotonicity::None],
        ),
        TermSpec::pair_mlp("X1", "X4", depth, width),
    ]
}

pub fn perturb(model: &mut AnamModel, scale: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = model.params();
    for v in &mut p {
        *v += scale * rng.random_range(-1.0..1.0);
    }
    model.set_params(&p).unwrap();
}

/// Largest elementwise mismatch between the analytic gradient and central
/// differences, skipping coordinates where the objective is not smooth at
/// the probe scale (the differences at `h` and `h/10` disagree).
pub fn gradient_mismatch(
    model: &AnamModel,
    objective: &Objective,
    data: &Dataset,
    rows: &[usize],
    h: f64,
) -> (f64, usize) {
    let analytic = objective.evaluate(model, data, rows).unwrap().grad.flatten();
    let base = model.params();
    let f = |p: &[f64]| {
        let mut m = model.clone();
        m.set_params(p).unwrap();
        objective.evaluate(&m, data, rows).unwrap().total
    };
    let central = |i: usize, step: f64| {
        let mut p = base.clone();
        p[i] = base[i] + step;
        let up = f(&p);
        p[i] = base[i] - step;
        (up - f(&p)) / (2.0 * step)
    };
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for i in 0..base.len() {
        let fd = central(i, h);
        let fd_fine = central(i, h / 10.0);
        let scale = fd.abs().max(fd_fine.abs()).max(1e-3);
        if (fd - fd_fine).abs() > 1e-5 * scale {
            skipped += 1;
            continue;
        }
        let err = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-3);
        worst = worst.max(err);
    }
    (worst, skipped)
}

pub fn gamma() -> DistributionSpec {
    DistributionSpec::gamma(1.0)
}
