use serde::{Deserialize, Serialize};

use super::Monotonicity;
use crate::bits;
use crate::error::{AnamError, Result};

/// Vertex values of a 1-D or 2-D lattice. Vertex `(a, b)` is stored at
/// `a + sizes[0] * b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    sizes: Vec<usize>,
    monotonicity: Vec<Monotonicity>,
    #[serde(with = "bits::b64_f64s")]
    values: Vec<f64>,
}

/// Lattice value at a point with its gradients. `weights` holds the
/// interpolation weight of each contributing vertex (two in 1-D, four in 2-D),
/// which is also the gradient of the value with respect to that vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeEval {
    pub value: f64,
    pub weights: [(usize, f64); 4],
    pub len: usize,
    pub dinput: [f64; 2],
}

impl LatticeEval {
    pub fn vertex_weights(&self) -> &[(usize, f64)] {
        &self.weights[..self.len]
    }
}

impl LatticeParams {
    pub fn new(sizes: Vec<usize>, monotonicity: Vec<Monotonicity>, values: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > 2 || monotonicity.len() != sizes.len() {
            return Err(AnamError::InvalidModel(
                "lattice must have 1 or 2 dimensions with one monotonicity each".into(),
            ));
        }
        if sizes.iter().any(|&m| m < 2) {
            return Err(AnamError::InvalidModel(
                "lattice needs at least 2 vertices per dimension".into(),
            ));
        }
        let count: usize = sizes.iter().product();
        if values.len() != count {
            return Err(AnamError::InvalidModel(format!(
                "lattice expects {count} vertex values, got {}",
                values.len()
            )));
        }
        Ok(LatticeParams {
            sizes,
            monotonicity,
            values,
        })
    }

    /// Linear ramp with equal positive slope along increasing dimensions,
    /// negative along decreasing ones and flat along unconstrained ones: the
    /// value at vertex `(a, b)` sums `±a/(M_0-1)` and `±b/(M_1-1)` over the
    /// monotone dimensions.
    pub fn ramp(sizes: Vec<usize>, monotonicity: Vec<Monotonicity>) -> Result<Self> {
        let count: usize = sizes.iter().product();
        let mut lattice = LatticeParams::new(sizes, monotonicity, vec![0.0; count])?;
        for idx in 0..count {
            let coords = lattice.coords(idx);
            lattice.values[idx] = coords
                .iter()
                .zip(&lattice.sizes)
                .zip(&lattice.monotonicity)
                .map(|((&c, &m), dir)| {
                    let step = c as f64 / (m - 1) as f64;
                    match dir {
                        Monotonicity::Increasing => step,
                        Monotonicity::Decreasing => -step,
                        Monotonicity::None => 0.0,
                    }
                })
                .sum();
        }
        Ok(lattice)
    }

    pub fn dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn monotonicity(&self) -> &[Monotonicity] {
        &self.monotonicity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        match coords {
            [a] => *a,
            [a, b] => a + self.sizes[0] * b,
            _ => unreachable!("lattices are 1-D or 2-D"),
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<usize> {
        if self.sizes.len() == 1 {
            vec![idx]
        } else {
            vec![idx % self.sizes[0], idx / self.sizes[0]]
        }
    }

    /// Evaluates at a point already scaled to `[0, M_d - 1]` per dimension.
    pub fn eval(&self, input: &[f64]) -> Result<LatticeEval> {
        if input.len() != self.dims() {
            return Err(AnamError::InvalidArgument(format!(
                "lattice has {} dimensions, got {} inputs",
                self.dims(),
                input.len()
            )));
        }
        for (dim, (&v, &m)) in input.iter().zip(&self.sizes).enumerate() {
            let max = (m - 1) as f64;
            if !(0.0..=max).contains(&v) {
                return Err(AnamError::LatticeRange { dim, value: v, max });
            }
        }
        Ok(self.eval_unchecked(input))
    }

    /// Lower cell corner and offset; the top boundary belongs to the last cell.
    #[inline]
    fn cell(v: f64, m: usize) -> (usize, f64) {
        let a = (v.floor() as usize).min(m - 2);
        (a, v - a as f64)
    }

    /// [`LatticeParams::eval`] without range checks; inputs must be in range.
    #[inline]
    pub fn eval_unchecked(&self, input: &[f64]) -> LatticeEval {
        let lam = &self.values;
        if self.sizes.len() == 1 {
            let (a, g) = Self::cell(input[0], self.sizes[0]);
            let (l0, l1) = (lam[a], lam[a + 1]);
            LatticeEval {
                value: (1.0 - g) * l0 + g * l1,
                weights: [(a, 1.0 - g), (a + 1, g), (0, 0.0), (0, 0.0)],
                len: 2,
                dinput: [l1 - l0, 0.0],
            }
        } else {
            let mj = self.sizes[0];
            let (a, g1) = Self::cell(input[0], mj);
            let (b, g2) = Self::cell(input[1], self.sizes[1]);
            let i00 = a + mj * b;
            let i10 = i00 + 1;
            let i01 = i00 + mj;
            let i11 = i01 + 1;
            let (l00, l10, l01, l11) = (lam[i00], lam[i10], lam[i01], lam[i11]);
            let w00 = (1.0 - g1) * (1.0 - g2);
            let w10 = g1 * (1.0 - g2);
            let w01 = (1.0 - g1) * g2;
            let w11 = g1 * g2;
            LatticeEval {
                value: w00 * l00 + w10 * l10 + w01 * l01 + w11 * l11,
                weights: [(i00, w00), (i10, w10), (i01, w01), (i11, w11)],
                len: 4,
                dinput: [
                    (1.0 - g2) * (l10 - l00) + g2 * (l11 - l01),
                    (1.0 - g1) * (l01 - l00) + g1 * (l11 - l10),
                ],
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> LatticeParams {
        LatticeParams::new(
            vec![2, 2],
            vec![Monotonicity::None; 2],
            vec![0.0, 1.0, 2.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn one_dimensional_midpoint() {
        let l = LatticeParams::new(vec![2], vec![Monotonicity::None], vec![0.0, 1.0]).unwrap();
        assert_eq!(l.eval(&[0.5]).unwrap().value, 0.5);
    }

    #[test]
    fn bilinear_centre_and_vertex() {
        let l = square();
        assert_eq!(l.eval(&[0.5, 0.5]).unwrap().value, 1.5);
        assert_eq!(l.eval(&[1.0, 0.0]).unwrap().value, 1.0);
        assert_eq!(l.eval(&[1.0, 1.0]).unwrap().value, 3.0);
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(matches!(
            square().eval(&[1.5, 0.0]),
            Err(AnamError::LatticeRange { dim: 0, .. })
        ));
        assert!(square().eval(&[0.5]).is_err());
    }

    #[test]
    fn linear_spline_through_vertices() {
        let vals = vec![3.0, -1.0, 4.0, 1.5, 9.0];
        let l = LatticeParams::new(vec![5], vec![Monotonicity::None], vals.clone()).unwrap();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(l.eval(&[i as f64]).unwrap().value, *v);
        }
    }

    #[test]
    fn ramp_initialisation() {
        let l = LatticeParams::ramp(
            vec![3, 2],
            vec![Monotonicity::Decreasing, Monotonicity::None],
        )
        .unwrap();
        assert_eq!(l.values(), &[0.0, -0.5, -1.0, 0.0, -0.5, -1.0]);
        let both = LatticeParams::ramp(
            vec![2, 2],
            vec![Monotonicity::Increasing, Monotonicity::Increasing],
        )
        .unwrap();
        assert_eq!(both.values(), &[0.0, 1.0, 1.0, 2.0]);
    }
}
