use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bits;
use crate::data::{Dataset, Feature, FeatureKind};
use crate::distributions::{DistributionSpec, Family};
use crate::error::{AnamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlmOptions {
    /// Ridge added to the non-intercept diagonal; `None` fails on a
    /// rank-deficient design instead.
    pub ridge: Option<f64>,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for GlmOptions {
    fn default() -> Self {
        GlmOptions {
            ridge: None,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

/// Log-link GLM over the raw design: an intercept, continuous columns as
/// given and categorical columns as treatment dummies (first level dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlmModel {
    features: Vec<Feature>,
    pub columns: Vec<String>,
    #[serde(with = "bits::b64_f64s")]
    pub coefficients: Vec<f64>,
    pub distribution: DistributionSpec,
    pub uses_offset: bool,
    pub iterations: usize,
    /// Training NLL after each accepted iteration.
    pub nll_trace: Vec<f64>,
}

fn design(ds: &Dataset) -> (DMatrix<f64>, Vec<String>) {
    let mut columns = vec!["(intercept)".to_string()];
    let mut sources: Vec<(usize, Option<usize>)> = Vec::new();
    for (j, f) in ds.features().iter().enumerate() {
        match &f.kind {
            FeatureKind::Continuous => {
                columns.push(f.name.clone());
                sources.push((j, None));
            }
            FeatureKind::Categorical { levels } => {
                for (l, name) in levels.iter().enumerate().skip(1) {
                    columns.push(format!("{}={name}", f.name));
                    sources.push((j, Some(l)));
                }
            }
        }
    }
    let x = DMatrix::from_fn(ds.n(), columns.len(), |i, c| {
        if c == 0 {
            return 1.0;
        }
        let (j, level) = sources[c - 1];
        let v = ds.value(i, j);
        match level {
            None => v,
            Some(l) => f64::from(u8::from(v as usize == l)),
        }
    });
    (x, columns)
}

fn mean_nll(dist: DistributionSpec, y: &[f64], eta: &DVector<f64>) -> f64 {
    let clip = crate::distributions::ClipBounds::default();
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| dist.nll_eta(yi, e, clip).0)
        .sum::<f64>()
        / y.len() as f64
}

/// Maximum-likelihood fit by iteratively reweighted least squares with step
/// halving. Stops when no coefficient moves by more than `tol`.
pub fn fit_glm(train: &Dataset, dist: DistributionSpec, opts: GlmOptions) -> Result<GlmModel> {
    dist.validate()?;
    if train.is_empty() {
        return Err(AnamError::InvalidArgument("cannot fit a GLM on no rows".into()));
    }
    let (x, columns) = design(train);
    let n = train.n();
    let k = columns.len();
    let y = train.response();
    let offset = DVector::from_fn(n, |i, _| train.exposure().map_or(0.0, |e| e[i].ln()));
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mean_e = train.exposure().map_or(1.0, |e| e.iter().sum::<f64>() / n as f64);

    let mut beta = DVector::zeros(k);
    beta[0] = (mean_y / mean_e).ln();
    let mut eta = &x * &beta + &offset;
    let mut nll = mean_nll(dist, y, &eta);
    let mut trace = vec![nll];
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        // log link: Gamma weights are constant, Poisson weights are mu
        let mu = eta.map(f64::exp);
        let w = match dist.family {
            Family::Gamma { .. } => DVector::from_element(n, 1.0),
            Family::Poisson => mu.clone(),
        };
        let z = DVector::from_fn(n, |i, _| eta[i] - offset[i] + (y[i] - mu[i]) / mu[i]);
        let mut xtwx = DMatrix::zeros(k, k);
        let mut xtwz = DVector::zeros(k);
        for i in 0..n {
            let row = x.row(i);
            let wi = w[i];
            for a in 0..k {
                let ra = row[a] * wi;
                xtwz[a] += ra * z[i];
                for b in 0..=a {
                    xtwx[(a, b)] += ra * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                xtwx[(b, a)] = xtwx[(a, b)];
            }
        }
        if let Some(r) = opts.ridge {
            for a in 1..k {
                xtwx[(a, a)] += r;
            }
        }
        let diag_max = (0..k).map(|a| xtwx[(a, a)]).fold(0.0, f64::max);
        let chol = xtwx.clone().cholesky().filter(|c| {
            let l = c.l_dirty();
            (0..k).all(|a| l[(a, a)] * l[(a, a)] > 1e-12 * diag_max)
        });
        let Some(chol) = chol else {
            return Err(AnamError::RankDeficient);
        };
        let target = chol.solve(&xtwz);
        let mut step = &target - &beta;
        let mut accepted = None;
        for _ in 0..30 {
            let candidate = &beta + &step;
            let cand_eta = &x * &candidate + &offset;
            let cand_nll = mean_nll(dist, y, &cand_eta);
            if cand_nll <= nll + 1e-12 * nll.abs().max(1.0) {
                accepted = Some((candidate, cand_eta, cand_nll));
                break;
            }
            step /= 2.0;
        }
        let Some((candidate, cand_eta, cand_nll)) = accepted else {
            break;
        };
        let change = (&candidate - &beta).amax();
        beta = candidate;
        eta = cand_eta;
        nll = cand_nll;
        trace.push(nll);
        if change < opts.tol {
            break;
        }
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(AnamError::NumericOverflow("GLM coefficients are not finite".into()));
    }
    Ok(GlmModel {
        features: train.features().to_vec(),
        columns,
        coefficients: beta.iter().copied().collect(),
        distribution: dist,
        uses_offset: train.exposure().is_some(),
        iterations,
        nll_trace: trace,
    })
}

impl GlmModel {
    /// Predicted means, including the exposure offset when the model has one.
    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        if ds.features() != self.features.as_slice() {
            return Err(AnamError::SchemaMismatch("GLM was fitted on different features".into()));
        }
        if self.uses_offset && ds.exposure().is_none() {
            return Err(AnamError::MissingExposure);
        }
        let (x, _) = design(ds);
        let beta = DVector::from_column_slice(&self.coefficients);
        let eta = x * beta;
        let clip = crate::distributions::ClipBounds::default();
        Ok(eta
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let off = if self.uses_offset {
                    ds.exposure().expect("checked")[i].ln()
                } else {
                    0.0
                };
                (e + off).exp().clamp(clip.min, clip.max)
            })
            .collect())
    }

    pub fn num_coefficients(&self) -> usize {
        self.coefficients.len()
    }
}
