//! Feed-forward shape networks with triangle-shaped hidden layers and exact
//! backpropagation.
//!
//! Parameters live in one flat vector. Each layer stores its weight matrix
//! (`outputs x inputs`, row-major) followed by its bias vector. Hidden layers
//! use the configured activation, the single output unit is linear.

use ndarray::{linalg::general_mat_mul, Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{AnamError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu { slope: f64 },
    Linear,
}

impl Default for Activation {
    fn default() -> Self {
        Activation::LeakyRelu { slope: 0.01 }
    }
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if z >= 0.0 {
                    z
                } else {
                    slope * z
                }
            }
            Activation::Linear => z,
        }
    }

    /// Derivative; the kink at zero takes the positive branch.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::LeakyRelu { slope } => {
                if z >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_layers: usize,
    pub first_hidden_width: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl MlpConfig {
    /// Hidden widths shrinking linearly from `first_hidden_width` towards the
    /// single output unit: layer `l` of `L` has
    /// `round(first * (L - l + 1) / L)` units, at least one.
    pub fn hidden_widths(&self) -> Vec<usize> {
        let l_total = self.hidden_layers;
        (1..=l_total)
            .map(|l| {
                let w = self.first_hidden_width as f64 * (l_total - l + 1) as f64 / l_total as f64;
                (w.round() as usize).max(1)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(AnamError::InvalidConfig("mlp input_dim must be positive".into()));
        }
        if self.hidden_layers > 0 && self.first_hidden_width == 0 {
            return Err(AnamError::InvalidConfig(
                "mlp first hidden width must be positive".into(),
            ));
        }
        if let Activation::LeakyRelu { slope } = self.activation {
            if !slope.is_finite() {
                return Err(AnamError::InvalidConfig("leaky relu slope must be finite".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    layers: Vec<LayerShape>,
    hidden_activation: Activation,
    #[serde(with = "bits::b64_f64s")]
    values: Vec<f64>,
}

/// Activations kept from a batch forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// `inputs[l]` is the input matrix of layer `l` (`batch x inputs`).
    inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Array2<f64>>,
}

/// Result of [`MlpParams::eval_with_grad`].
#[derive(Debug, Clone)]
pub struct MlpGradient {
    pub output: f64,
    /// Gradient of `upstream * output` with the same layout as the parameters.
    pub param_grads: MlpParams,
    pub input_grad: Vec<f64>,
}

impl MlpParams {
    /// Glorot-uniform weights `U(-a, a)`, `a = sqrt(6 / (fan_in + fan_out))`,
    /// and zero biases.
    pub fn init_glorot(cfg: &MlpConfig) -> Result<Self> {
        cfg.validate()?;
        let mut widths = vec![cfg.input_dim];
        widths.extend(cfg.hidden_widths());
        widths.push(1);
        let layers: Vec<LayerShape> = widths
            .windows(2)
            .map(|w| LayerShape {
                inputs: w[0],
                outputs: w[1],
            })
            .collect();
        let mut rng = rng::stream(cfg.seed, rng::streams::INIT);
        let mut values = Vec::new();
        for layer in &layers {
            let a = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            values.extend((0..layer.inputs * layer.outputs).map(|_| rng.random_range(-a..a)));
            values.extend(std::iter::repeat_n(0.0, layer.outputs));
        }
        Ok(MlpParams {
            layers,
            hidden_activation: cfg.activation,
            values,
        })
    }

    pub fn from_parts(
        layers: Vec<LayerShape>,
        hidden_activation: Activation,
        values: Vec<f64>,
    ) -> Result<Self> {
        if layers.is_empty() || layers.last().map(|l| l.outputs) != Some(1) {
            return Err(AnamError::InvalidModel("mlp must end in one output unit".into()));
        }
        if layers.windows(2).any(|w| w[0].outputs != w[1].inputs) {
            return Err(AnamError::InvalidModel("mlp layer shapes do not chain".into()));
        }
        let expected: usize = layers.iter().map(|l| l.outputs * (l.inputs + 1)).sum();
        if values.len() != expected {
            return Err(AnamError::InvalidModel(format!(
                "mlp expects {expected} parameters, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnamError::InvalidModel("non-finite mlp parameter".into()));
        }
        Ok(MlpParams {
            layers,
            hidden_activation,
            values,
        })
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn num_params(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `(weights offset, bias offset)` of every layer.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut at = 0;
        self.layers
            .iter()
            .map(|l| {
                let w = at;
                let b = w + l.inputs * l.outputs;
                at = b + l.outputs;
                (w, b)
            })
            .collect()
    }

    fn weights(&self, l: usize, off: (usize, usize)) -> ArrayView2<'_, f64> {
        let shape = self.layers[l];
        ArrayView2::from_shape((shape.outputs, shape.inputs), &self.values[off.0..off.1])
            .expect("layer layout")
    }

    fn bias(&self, l: usize, off: (usize, usize)) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.values[off.1..off.1 + self.layers[l].outputs])
    }

    /// Evaluates a batch (`batch x input_dim`). Returns one output per row and
    /// the cache needed by [`MlpParams::backward_batch`].
    pub fn forward_batch(&self, input: ArrayView2<'_, f64>) -> Result<(Vec<f64>, MlpCache)> {
        if input.ncols() != self.input_dim() {
            return Err(AnamError::InvalidArgument(format!(
                "mlp expects {} inputs, got {}",
                self.input_dim(),
                input.ncols()
            )));
        }
        let offsets = self.offsets();
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(last);
        let mut current = input.to_owned();
        for (l, &off) in offsets.iter().enumerate() {
            let mut z = current.dot(&self.weights(l, off).t());
            z += &self.bias(l, off);
            inputs.push(current);
            if l < last {
                let act = self.hidden_activation;
                current = z.mapv(|v| act.apply(v));
                pre.push(z);
            } else {
                current = z;
            }
        }
        let output: Vec<f64> = current.into_raw_vec_and_offset().0;
        if let Some(i) = output.iter().position(|v| !v.is_finite()) {
            return Err(AnamError::NumericOverflow(format!(
                "mlp produced a non-finite output for batch row {i}"
            )));
        }
        Ok((output, MlpCache { inputs, pre }))
    }

    /// Accumulates `sum_rows upstream[r] * d output[r] / d params` into `grad`
    /// (same layout as the parameters). When `want_input_grad` is set the
    /// gradient with respect to the batch input is returned.
    pub fn backward_batch(
        &self,
        cache: &MlpCache,
        upstream: &[f64],
        grad: &mut [f64],
        want_input_grad: bool,
    ) -> Option<Array2<f64>> {
        assert_eq!(grad.len(), self.values.len(), "gradient buffer layout");
        let batch = upstream.len();
        let offsets = self.offsets();
        let mut delta = Array2::from_shape_vec((batch, 1), upstream.to_vec()).expect("column");
        for l in (0..self.layers.len()).rev() {
            let shape = self.layers[l];
            let off = offsets[l];
            if l < self.layers.len() - 1 {
                let act = self.hidden_activation;
                delta.zip_mut_with(&cache.pre[l], |d, &z| *d *= act.derivative(z));
            }
            {
                let mut gw = ArrayViewMut2::from_shape(
                    (shape.outputs, shape.inputs),
                    &mut grad[off.0..off.1],
                )
                .expect("layer layout");
                general_mat_mul(1.0, &delta.t(), &cache.inputs[l], 1.0, &mut gw);
            }
            for (g, s) in grad[off.1..off.1 + shape.outputs]
                .iter_mut()
                .zip(delta.sum_axis(Axis(0)))
            {
                *g += s;
            }
            if l > 0 || want_input_grad {
                delta = delta.dot(&self.weights(l, off));
            }
        }
        want_input_grad.then_some(delta)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let input = ArrayView2::from_shape((1, x.len()), x).expect("row");
        Ok(self.forward_batch(input)?.0[0])
    }

    /// Output for one input vector, with gradients of `upstream * output`.
    pub fn eval_with_grad(&self, x: &[f64], upstream: f64) -> Result<MlpGradient> {
        let input = ArrayView2::from_shape((1, x.len()), x).expect("row");
        let (out, cache) = self.forward_batch(input)?;
        let mut grad = vec![0.0; self.values.len()];
        let input_grad = self
            .backward_batch(&cache, &[upstream], &mut grad, true)
            .expect("requested");
        Ok(MlpGradient {
            output: out[0],
            param_grads: MlpParams {
                layers: self.layers.clone(),
                hidden_activation: self.hidden_activation,
                values: grad,
            },
            input_grad: input_grad.into_raw_vec_and_offset().0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(input_dim: usize, layers: usize, width: usize, seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim,
            hidden_layers: layers,
            first_hidden_width: width,
            activation: Activation::default(),
            seed,
        }
    }

    #[test]
    fn triangle_widths() {
        assert_eq!(cfg(1, 2, 20, 0).hidden_widths(), vec![20, 10]);
        assert_eq!(
            cfg(2, 10, 100, 0).hidden_widths(),
            vec![100, 90, 80, 70, 60, 50, 40, 30, 20, 10]
        );
        assert_eq!(cfg(1, 4, 2, 0).hidden_widths(), vec![2, 2, 1, 1]);
    }

    #[test]
    fn glorot_bounds_and_zero_bias() {
        // 4 -> 2 hidden -> 1: the first layer has a = sqrt(6/6) = 1.
        let p = MlpParams::init_glorot(&cfg(4, 1, 2, 5)).unwrap();
        let off = p.offsets();
        assert!(p.values[off[0].0..off[0].1].iter().all(|w| w.abs() < 1.0));
        for (l, o) in off.iter().enumerate() {
            let n = p.layers[l].outputs;
            assert!(p.values[o.1..o.1 + n].iter().all(|&b| b == 0.0));
        }
        let again = MlpParams::init_glorot(&cfg(4, 1, 2, 5)).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn zero_network_outputs_bias() {
        let layers = vec![
            LayerShape { inputs: 3, outputs: 2 },
            LayerShape { inputs: 2, outputs: 1 },
        ];
        let mut values = vec![0.0; 2 * 3 + 2 + 2 + 1];
        *values.last_mut().unwrap() = 0.75;
        let p = MlpParams::from_parts(layers, Activation::Linear, values).unwrap();
        for x in [[0.0, 1.0, -3.0], [5.0, 5.0, 5.0]] {
            assert_eq!(p.eval(&x).unwrap(), 0.75);
        }
    }

    #[test]
    fn identity_layer() {
        let p = MlpParams::from_parts(
            vec![LayerShape { inputs: 1, outputs: 1 }],
            Activation::Linear,
            vec![1.0, 0.0],
        )
        .unwrap();
        let g = p.eval_with_grad(&[2.5], 1.0).unwrap();
        assert_eq!(g.output, 2.5);
        assert_eq!(g.param_grads.values(), &[2.5, 1.0]);
        assert_eq!(g.input_grad, vec![1.0]);
    }

    #[test]
    fn leaky_relu_is_continuous_at_zero() {
        let a = Activation::LeakyRelu { slope: 0.01 };
        assert_eq!(a.apply(0.0), 0.0);
        assert_eq!(a.apply(-2.0), -0.02);
        assert_eq!(a.apply(3.0), 3.0);
        assert_eq!(a.derivative(0.0), 1.0);
        assert!(a.apply(-1e-300).abs() < 1e-300);
    }

    #[test]
    fn rejects_wrong_input_width_and_bad_layouts() {
        let p = MlpParams::init_glorot(&cfg(2, 1, 3, 1)).unwrap();
        assert!(p.eval(&[1.0]).is_err());
        assert!(MlpParams::from_parts(
            vec![LayerShape { inputs: 1, outputs: 2 }],
            Activation::Linear,
            vec![0.0; 4],
        )
        .is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let p = MlpParams::from_parts(
            vec![LayerShape { inputs: 1, outputs: 1 }],
            Activation::Linear,
            vec![f64::MAX, 0.0],
        )
        .unwrap();
        assert!(matches!(p.eval(&[10.0]), Err(AnamError::NumericOverflow(_))));
    }
}
