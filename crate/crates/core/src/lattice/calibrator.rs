use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{AnamError, Result};

/// Piecewise-linear map from a raw input onto the lattice coordinate range
/// `[0, M - 1]`. Knot locations are fixed; the output value at each knot is
/// trainable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibrator {
    #[serde(with = "bits::b64_f64s")]
    knots: Vec<f64>,
    #[serde(with = "bits::b64_f64s")]
    outputs: Vec<f64>,
    max_output: f64,
    monotonic: bool,
}

/// Output of [`Calibrator::calibrate`]: the scaled value, its sparse gradient
/// with respect to the knot outputs and its derivative in the raw input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub value: f64,
    pub knot_grads: [(usize, f64); 2],
    pub dx: f64,
}

impl Calibrator {
    pub fn new(knots: Vec<f64>, outputs: Vec<f64>, vertices: usize, monotonic: bool) -> Result<Self> {
        if knots.len() < 2 || knots.len() != outputs.len() {
            return Err(AnamError::InvalidModel(
                "calibrator needs at least two knots with one output each".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
            return Err(AnamError::InvalidModel(
                "calibrator knots must be finite and strictly increasing".into(),
            ));
        }
        if vertices < 2 {
            return Err(AnamError::InvalidModel("lattice needs at least 2 vertices".into()));
        }
        let max_output = (vertices - 1) as f64;
        if outputs.iter().any(|o| !(0.0..=max_output).contains(o)) {
            return Err(AnamError::InvalidModel(format!(
                "calibrator outputs must lie in [0, {max_output}]"
            )));
        }
        Ok(Calibrator {
            knots,
            outputs,
            max_output,
            monotonic,
        })
    }

    /// Min-max scaling of `[lo, hi]` onto `[0, M - 1]`.
    pub fn min_max(lo: f64, hi: f64, vertices: usize, monotonic: bool) -> Result<Self> {
        Calibrator::new(vec![lo, hi], vec![0.0, (vertices - 1) as f64], vertices, monotonic)
    }

    /// Knots at `num_knots` uniform quantiles of `values` (duplicates
    /// dropped); outputs start on the min-max line through the knots.
    pub fn from_quantiles(
        values: &[f64],
        num_knots: usize,
        vertices: usize,
        monotonic: bool,
    ) -> Result<Self> {
        if num_knots < 2 {
            return Err(AnamError::InvalidConfig("calibrator needs at least 2 knots".into()));
        }
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return Err(AnamError::InvalidArgument("no data for calibrator knots".into()));
        }
        let mut knots: Vec<f64> = (0..num_knots)
            .map(|i| crate::data::quantile(&sorted, i as f64 / (num_knots - 1) as f64))
            .collect();
        knots.dedup_by(|a, b| a <= b);
        if knots.len() < 2 {
            return Err(AnamError::InvalidArgument(
                "calibrator input has a single distinct value".into(),
            ));
        }
        let (lo, hi) = (knots[0], knots[knots.len() - 1]);
        let max_output = (vertices - 1) as f64;
        let outputs = knots
            .iter()
            .map(|k| (max_output * (k - lo) / (hi - lo)).clamp(0.0, max_output))
            .collect();
        Calibrator::new(knots, outputs, vertices, monotonic)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn outputs_mut(&mut self) -> &mut [f64] {
        &mut self.outputs
    }

    pub fn max_output(&self) -> f64 {
        self.max_output
    }

    pub fn is_monotonic(&self) -> bool {
        self.monotonic
    }

    /// Linear interpolation between the bracketing knots; inputs beyond the
    /// end knots take the end outputs. The result is clamped to `[0, M-1]`.
    pub fn calibrate(&self, x: f64) -> Calibration {
        let k = &self.knots;
        let last = k.len() - 1;
        let (value, knot_grads, dx) = if x <= k[0] {
            (self.outputs[0], [(0, 1.0), (0, 0.0)], 0.0)
        } else if x >= k[last] {
            (self.outputs[last], [(last, 1.0), (last, 0.0)], 0.0)
        } else {
            // first knot strictly greater than x; x lies in [k[i], k[i+1])
            let hi = k.partition_point(|&v| v <= x);
            let i = hi - 1;
            let width = k[hi] - k[i];
            let t = (x - k[i]) / width;
            let (o0, o1) = (self.outputs[i], self.outputs[hi]);
            (
                (1.0 - t) * o0 + t * o1,
                [(i, 1.0 - t), (hi, t)],
                (o1 - o0) / width,
            )
        };
        if value < 0.0 || value > self.max_output {
            Calibration {
                value: value.clamp(0.0, self.max_output),
                knot_grads: [(0, 0.0), (0, 0.0)],
                dx: 0.0,
            }
        } else {
            Calibration {
                value,
                knot_grads,
                dx,
            }
        }
    }
}
