use anam_core::mlp::{Activation, MlpConfig, MlpParams};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn net(seed: u64) -> MlpParams {
    MlpParams::init_glorot(&MlpConfig {
        input_dim: 3,
        hidden_layers: 2,
        first_hidden_width: 8,
        activation: Activation::LeakyRelu { slope: 0.01 },
        seed,
    })
    .unwrap()
}

#[test]
fn parameter_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let mut params = net(seed);
        // non-zero biases keep the probe away from hidden units sitting at 0
        for v in params.values_mut() {
            *v += 0.1 * rng.random_range(-1.0..1.0);
        }
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = params.eval_with_grad(&x, 1.0).unwrap().param_grads;
        for i in 0..params.num_params() {
            let mut up = params.clone();
            up.values_mut()[i] += h;
            let mut down = params.clone();
            down.values_mut()[i] -= h;
            let fd = (up.eval(&x).unwrap() - down.eval(&x).unwrap()) / (2.0 * h);
            let a = analytic.values()[i];
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-5, "worst relative error {worst}");
}

#[test]
fn batch_gradient_is_the_sum_of_row_gradients() {
    let params = net(3);
    let rows = vec![0.1, -0.4, 0.9, -0.7, 0.2, 0.3, 0.5, 0.5, -0.5];
    let input = Array2::from_shape_vec((3, 3), rows.clone()).unwrap();
    let (out, cache) = params.forward_batch(input.view()).unwrap();
    let upstream = [1.0, -2.0, 0.5];
    let mut grad = vec![0.0; params.num_params()];
    params.backward_batch(&cache, &upstream, &mut grad, false);
    let mut expected = vec![0.0; params.num_params()];
    for r in 0..3 {
        let g = params.eval_with_grad(&rows[3 * r..3 * r + 3], upstream[r]).unwrap();
        assert_eq!(g.output, out[r]);
        for (e, v) in expected.iter_mut().zip(g.param_grads.values()) {
            *e += v;
        }
    }
    for (a, b) in grad.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn same_seed_is_bit_identical() {
    assert_eq!(net(9), net(9));
    assert_ne!(net(9), net(10));
}
