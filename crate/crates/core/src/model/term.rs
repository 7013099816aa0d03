use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::data::{Dataset, Feature, FeatureKind};
use crate::error::{AnamError, Result};
use crate::lattice::{build_constraints, Calibration, Calibrator, ConstraintSet, LatticeEval, LatticeParams, Monotonicity};
use crate::mlp::{Activation, MlpCache, MlpConfig, MlpParams};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum TermKind {
    Main { feature: String },
    Pair { first: String, second: String },
}

impl TermKind {
    pub fn features(&self) -> Vec<&str> {
        match self {
            TermKind::Main { feature } => vec![feature],
            TermKind::Pair { first, second } => vec![first, second],
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, TermKind::Pair { .. })
    }

    /// `"X1"` for a main effect, `"X3:X4"` for a pair.
    pub fn label(&self) -> String {
        self.features().join(":")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Backend {
    Mlp {
        hidden_layers: usize,
        first_width: usize,
        activation: Activation,
    },
    /// Categorical inputs ignore `vertices` and `calibrator_knots`: they use
    /// one vertex per level and no calibrator.
    Lattice {
        vertices: usize,
        calibrator_knots: usize,
    },
}

/// Declaration of one main or pairwise effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub kind: TermKind,
    pub backend: Backend,
    /// One entry per input feature.
    pub monotonicity: Vec<Monotonicity>,
    pub smooth: bool,
}

impl TermSpec {
    pub fn main_mlp(feature: &str, hidden_layers: usize, first_width: usize) -> Self {
        TermSpec {
            kind: TermKind::Main {
                feature: feature.into(),
            },
            backend: Backend::Mlp {
                hidden_layers,
                first_width,
                activation: Activation::default(),
            },
            monotonicity: vec![Monotonicity::None],
            smooth: false,
        }
    }

    pub fn pair_mlp(first: &str, second: &str, hidden_layers: usize, first_width: usize) -> Self {
        TermSpec {
            kind: TermKind::Pair {
                first: first.into(),
                second: second.into(),
            },
            backend: Backend::Mlp {
                hidden_layers,
                first_width,
                activation: Activation::default(),
            },
            monotonicity: vec![Monotonicity::None; 2],
            smooth: false,
        }
    }

    pub fn main_lattice(feature: &str, vertices: usize, knots: usize, dir: Monotonicity) -> Self {
        TermSpec {
            kind: TermKind::Main {
                feature: feature.into(),
            },
            backend: Backend::Lattice {
                vertices,
                calibrator_knots: knots,
            },
            monotonicity: vec![dir],
            smooth: false,
        }
    }

    pub fn pair_lattice(
        first: &str,
        second: &str,
        vertices: usize,
        knots: usize,
        dirs: [Monotonicity; 2],
    ) -> Self {
        TermSpec {
            kind: TermKind::Pair {
                first: first.into(),
                second: second.into(),
            },
            backend: Backend::Lattice {
                vertices,
                calibrator_knots: knots,
            },
            monotonicity: dirs.to_vec(),
            smooth: false,
        }
    }

    pub fn smooth(mut self) -> Self {
        self.smooth = true;
        self
    }

    pub fn label(&self) -> String {
        self.kind.label()
    }

    pub fn is_constrained(&self) -> bool {
        self.monotonicity.iter().any(|m| m.is_constrained())
    }

    pub(crate) fn validate(&self, features: &[Feature]) -> Result<()> {
        let names = self.kind.features();
        let label = self.label();
        if names.len() == 2 && names[0] == names[1] {
            return Err(AnamError::InvalidModel(format!(
                "pair term '{label}' repeats a feature"
            )));
        }
        if self.monotonicity.len() != names.len() {
            return Err(AnamError::InvalidModel(format!(
                "term '{label}' needs one monotonicity per input"
            )));
        }
        if self.is_constrained() && !matches!(self.backend, Backend::Lattice { .. }) {
            return Err(AnamError::InvalidModel(format!(
                "term '{label}' is monotone and must use the lattice backend"
            )));
        }
        for name in &names {
            let feat = features.iter().find(|f| f.name == *name).ok_or_else(|| {
                AnamError::InvalidModel(format!("term '{label}' uses unknown feature '{name}'"))
            })?;
            if self.smooth && feat.kind.is_categorical() {
                return Err(AnamError::InvalidModel(format!(
                    "smoothness needs a continuous input, '{name}' is categorical"
                )));
            }
            if let (FeatureKind::Categorical { levels }, Backend::Lattice { .. }) =
                (&feat.kind, &self.backend)
            {
                if levels.len() < 2 {
                    return Err(AnamError::InvalidModel(format!(
                        "lattice over '{name}' needs at least two levels"
                    )));
                }
            }
        }
        if self.smooth && self.kind.is_pair() {
            return Err(AnamError::InvalidModel(format!(
                "smoothness applies to main effects only, not '{label}'"
            )));
        }
        match self.backend {
            Backend::Lattice {
                vertices,
                calibrator_knots,
            } if vertices < 2 || calibrator_knots < 2 => Err(AnamError::InvalidModel(format!(
                "lattice term '{label}' needs at least 2 vertices and 2 calibrator knots"
            ))),
            Backend::Mlp {
                hidden_layers,
                first_width,
                ..
            } if hidden_layers > 0 && first_width == 0 => Err(AnamError::InvalidModel(format!(
                "mlp term '{label}' needs a positive width"
            ))),
            _ => Ok(()),
        }
    }
}

/// A calibrated lattice: one optional calibrator per input (categorical
/// inputs map their level index straight to the lattice coordinate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeShape {
    pub calibrators: Vec<Option<Calibrator>>,
    pub lattice: LatticeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Mlp(MlpParams),
    Lattice(LatticeShape),
}

/// A trained term: its shape function plus output weight and centring offset.
/// Its contribution to the linear predictor is `weight * (raw(x) - center)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub(crate) spec: TermSpec,
    pub(crate) inputs: Vec<usize>,
    /// Per input: level count for categorical features, 0 for continuous.
    pub(crate) levels: Vec<usize>,
    pub(crate) shape: Shape,
    #[serde(with = "bits::hex_f64")]
    pub(crate) weight: f64,
    #[serde(with = "bits::hex_f64")]
    pub(crate) center: f64,
}

/// Intermediate values of a batch evaluation, needed for the backward pass.
#[derive(Debug, Clone)]
pub enum TermCache {
    Mlp(MlpCache),
    Lattice(Vec<(LatticeEval, [Option<Calibration>; 2])>),
}

/// Gradient buffers with the layout of [`Term::param_blocks`].
pub type TermGrad = Vec<Vec<f64>>;

impl Term {
    pub(crate) fn build(
        spec: TermSpec,
        features: &[Feature],
        train: &Dataset,
        seed: u64,
    ) -> Result<Term> {
        spec.validate(features)?;
        let names = spec.kind.features();
        let inputs: Vec<usize> = names
            .iter()
            .map(|n| features.iter().position(|f| f.name == *n).expect("validated"))
            .collect();
        let levels: Vec<usize> = inputs
            .iter()
            .map(|&j| match &features[j].kind {
                FeatureKind::Continuous => 0,
                FeatureKind::Categorical { levels } => levels.len(),
            })
            .collect();
        let shape = match spec.backend {
            Backend::Mlp {
                hidden_layers,
                first_width,
                activation,
            } => {
                let input_dim = inputs
                    .iter()
                    .map(|&j| features[j].kind.encoded_width())
                    .sum();
                Shape::Mlp(MlpParams::init_glorot(&MlpConfig {
                    input_dim,
                    hidden_layers,
                    first_hidden_width: first_width,
                    activation,
                    seed,
                })?)
            }
            Backend::Lattice {
                vertices,
                calibrator_knots,
            } => {
                let mut sizes = Vec::new();
                let mut calibrators = Vec::new();
                for ((&j, &lv), &dir) in inputs.iter().zip(&levels).zip(&spec.monotonicity) {
                    if lv > 0 {
                        sizes.push(lv);
                        calibrators.push(None);
                    } else {
                        sizes.push(vertices);
                        calibrators.push(Some(Calibrator::from_quantiles(
                            &train.column(j),
                            calibrator_knots,
                            vertices,
                            dir.is_constrained(),
                        )?));
                    }
                }
                Shape::Lattice(LatticeShape {
                    calibrators,
                    lattice: LatticeParams::ramp(sizes, spec.monotonicity.clone())?,
                })
            }
        };
        Ok(Term {
            spec,
            inputs,
            levels,
            shape,
            weight: 1.0,
            center: 0.0,
        })
    }

    pub fn spec(&self) -> &TermSpec {
        &self.spec
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Collects this term's inputs for `rows` of a row-major matrix with `p`
    /// columns, `arity` values per row.
    pub(crate) fn gather(&self, x: &[f64], p: usize, rows: &[usize]) -> Vec<f64> {
        let mut points = Vec::with_capacity(rows.len() * self.arity());
        for &r in rows {
            for &j in &self.inputs {
                points.push(x[r * p + j]);
            }
        }
        points
    }

    fn mlp_encode(&self, points: &[f64], mlp: &MlpParams) -> Vec<f64> {
        let k = self.arity();
        let n = points.len() / k;
        let mut enc = Vec::with_capacity(n * mlp.input_dim());
        for point in points.chunks_exact(k) {
            for (&v, &lv) in point.iter().zip(&self.levels) {
                if lv == 0 {
                    enc.push(v);
                } else {
                    let hot = v as usize;
                    enc.extend((0..lv).map(|l| if l == hot { 1.0 } else { 0.0 }));
                }
            }
        }
        enc
    }

    /// Raw shape values (before weight and centring) at `points` (`arity`
    /// values per point), with the cache for [`Term::backward`].
    pub fn forward(&self, points: &[f64]) -> Result<(Vec<f64>, TermCache)> {
        let k = self.arity();
        match &self.shape {
            Shape::Mlp(mlp) => {
                let enc = self.mlp_encode(points, mlp);
                let n = points.len() / k;
                let view = ArrayView2::from_shape((n, mlp.input_dim()), &enc).expect("encoding");
                let (out, cache) = mlp.forward_batch(view)?;
                Ok((out, TermCache::Mlp(cache)))
            }
            Shape::Lattice(shape) => {
                let mut out = Vec::with_capacity(points.len() / k);
                let mut cache = Vec::with_capacity(points.len() / k);
                for point in points.chunks_exact(k) {
                    let mut coords = [0.0; 2];
                    let mut cals = [None, None];
                    for d in 0..k {
                        match &shape.calibrators[d] {
                            Some(cal) => {
                                let c = cal.calibrate(point[d]);
                                coords[d] = c.value;
                                cals[d] = Some(c);
                            }
                            None => coords[d] = point[d],
                        }
                    }
                    let ev = shape.lattice.eval(&coords[..k])?;
                    out.push(ev.value);
                    cache.push((ev, cals));
                }
                Ok((out, TermCache::Lattice(cache)))
            }
        }
    }

    /// Accumulates `sum_i upstream[i] * d raw_i / d params` into `grad`.
    pub fn backward(&self, cache: &TermCache, upstream: &[f64], grad: &mut TermGrad) {
        match (&self.shape, cache) {
            (Shape::Mlp(mlp), TermCache::Mlp(c)) => {
                mlp.backward_batch(c, upstream, &mut grad[0], false);
            }
            (Shape::Lattice(shape), TermCache::Lattice(evals)) => {
                // blocks: lattice values, then each calibrator's outputs
                let mut cal_block = [usize::MAX; 2];
                let mut next = 1;
                for (d, cal) in shape.calibrators.iter().enumerate() {
                    if cal.is_some() {
                        cal_block[d] = next;
                        next += 1;
                    }
                }
                for ((ev, cals), &up) in evals.iter().zip(upstream) {
                    if up == 0.0 {
                        continue;
                    }
                    for &(idx, w) in ev.vertex_weights() {
                        grad[0][idx] += up * w;
                    }
                    for (d, cal) in cals.iter().enumerate() {
                        if let Some(c) = cal {
                            let scale = up * ev.dinput[d];
                            let block = &mut grad[cal_block[d]];
                            for &(i, w) in &c.knot_grads {
                                block[i] += scale * w;
                            }
                        }
                    }
                }
            }
            _ => unreachable!("cache does not match term backend"),
        }
    }

    /// Views of the trainable shape parameters (weight and centre excluded).
    pub fn param_blocks(&self) -> Vec<&[f64]> {
        match &self.shape {
            Shape::Mlp(mlp) => vec![mlp.values()],
            Shape::Lattice(shape) => {
                let mut blocks = vec![shape.lattice.values()];
                blocks.extend(shape.calibrators.iter().flatten().map(|c| c.outputs()));
                blocks
            }
        }
    }

    pub fn param_blocks_mut(&mut self) -> Vec<&mut [f64]> {
        match &mut self.shape {
            Shape::Mlp(mlp) => vec![mlp.values_mut()],
            Shape::Lattice(shape) => {
                let mut blocks = vec![shape.lattice.values_mut()];
                blocks.extend(
                    shape
                        .calibrators
                        .iter_mut()
                        .flatten()
                        .map(|c| c.outputs_mut()),
                );
                blocks
            }
        }
    }

    pub fn zero_grad(&self) -> TermGrad {
        self.param_blocks().iter().map(|b| vec![0.0; b.len()]).collect()
    }

    /// Projects the parameters back onto the feasible set: lattice
    /// monotonicity, calibrator monotonicity and range, and a non-negative
    /// output weight for monotone terms.
    pub fn project(&mut self, max_iter: usize, tol: f64) {
        if self.spec.is_constrained() && self.weight < 0.0 {
            self.weight = 0.0;
        }
        if let Shape::Lattice(shape) = &mut self.shape {
            let cs = build_constraints(&shape.lattice);
            crate::lattice::dykstra_project(shape.lattice.values_mut(), &cs, max_iter, tol);
            for cal in shape.calibrators.iter_mut().flatten() {
                let max = cal.max_output();
                if cal.is_monotonic() {
                    let chain = ConstraintSet::chain(cal.outputs().len());
                    crate::lattice::dykstra_project(cal.outputs_mut(), &chain, max_iter, tol);
                }
                for o in cal.outputs_mut() {
                    *o = o.clamp(0.0, max);
                }
            }
        }
    }

    /// Largest violation of this term's lattice and calibrator constraints.
    pub fn constraint_violation(&self) -> f64 {
        match &self.shape {
            Shape::Mlp(_) => 0.0,
            Shape::Lattice(shape) => {
                let mut worst = build_constraints(&shape.lattice).max_violation(shape.lattice.values());
                for cal in shape.calibrators.iter().flatten() {
                    if cal.is_monotonic() {
                        worst = worst.max(
                            ConstraintSet::chain(cal.outputs().len()).max_violation(cal.outputs()),
                        );
                    }
                }
                worst
            }
        }
    }
}
