use serde::{Deserialize, Serialize};

use super::term::{Term, TermKind, TermSpec};
use crate::bits;
use crate::data::{Dataset, Feature, FeatureKind};
use crate::distributions::{ClipBounds, DistributionSpec};
use crate::error::{AnamError, Result};
use crate::rng::derive_seed;

/// Rows evaluated per forward pass when scoring a whole dataset.
pub(crate) const EVAL_CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnamModel {
    features: Vec<Feature>,
    /// Observed training range of each feature.
    #[serde(with = "bits::b64_f64s")]
    range_lo: Vec<f64>,
    #[serde(with = "bits::b64_f64s")]
    range_hi: Vec<f64>,
    #[serde(with = "bits::hex_f64")]
    pub(crate) bias: f64,
    pub(crate) terms: Vec<Term>,
    distribution: DistributionSpec,
    clip: ClipBounds,
    uses_offset: bool,
}

/// Output of [`AnamModel::predict`] for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mu: f64,
    pub eta: f64,
    /// Centred, weighted term values in declaration order.
    pub contributions: Vec<f64>,
}

/// Output of [`AnamModel::predict_batch`]. `contributions[t][i]` is term `t`
/// on row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    pub contributions: Vec<Vec<f64>>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn unordered_key(kind: &TermKind) -> Vec<String> {
    let mut names: Vec<String> = kind.features().iter().map(|s| s.to_string()).collect();
    names.sort();
    names
}

impl AnamModel {
    /// Builds an untrained model over the features of `train`.
    ///
    /// Terms are initialised from `seed`, the bias starts at the intercept
    /// MLE `log(mean y / mean exposure)` and every term is centred on `train`.
    pub fn build(
        specs: Vec<TermSpec>,
        train: &Dataset,
        distribution: DistributionSpec,
        seed: u64,
    ) -> Result<AnamModel> {
        distribution.validate()?;
        if train.is_empty() {
            return Err(AnamError::InvalidArgument(
                "cannot build a model on an empty dataset".into(),
            ));
        }
        let features = train.features().to_vec();
        AnamModel::validate_specs(&specs, &features)?;

        let (range_lo, range_hi) = (0..train.p()).map(|j| train.range(j)).unzip();
        let terms = specs
            .into_iter()
            .map(|spec| {
                let term_seed = derive_seed(seed, fnv1a(&spec.label()));
                Term::build(spec, &features, train, term_seed)
            })
            .collect::<Result<Vec<_>>>()?;

        let n = train.n() as f64;
        let mean_y = train.response().iter().sum::<f64>() / n;
        let mean_e = train
            .exposure()
            .map_or(1.0, |e| e.iter().sum::<f64>() / n);
        let mut model = AnamModel {
            features,
            range_lo,
            range_hi,
            bias: (mean_y / mean_e).ln(),
            terms,
            distribution,
            clip: ClipBounds::default(),
            uses_offset: train.exposure().is_some(),
        };
        model.center_terms(train)?;
        Ok(model)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_specs(&self) -> Vec<TermSpec> {
        self.terms.iter().map(|t| t.spec.clone()).collect()
    }

    pub fn distribution(&self) -> DistributionSpec {
        self.distribution
    }

    pub fn set_distribution(&mut self, distribution: DistributionSpec) {
        self.distribution = distribution;
    }

    pub fn clip(&self) -> ClipBounds {
        self.clip
    }

    pub fn uses_offset(&self) -> bool {
        self.uses_offset
    }

    /// Training range `(min, max)` of feature `j`.
    pub fn feature_range(&self, j: usize) -> (f64, f64) {
        (self.range_lo[j], self.range_hi[j])
    }

    /// Position of the term with this label; pair order is ignored.
    pub fn term_index(&self, label: &str) -> Option<usize> {
        let mut wanted: Vec<&str> = label.split(':').collect();
        wanted.sort_unstable();
        self.terms.iter().position(|t| {
            let mut names = t.spec.kind.features();
            names.sort_unstable();
            names == wanted
        })
    }

    pub fn term_labels(&self) -> Vec<String> {
        self.terms.iter().map(Term::label).collect()
    }

    /// Fails unless `ds` has the model's features, in order, and an exposure
    /// column exactly when the model uses an offset.
    pub fn check_dataset(&self, ds: &Dataset) -> Result<()> {
        if ds.features() != self.features.as_slice() {
            let names: Vec<&str> = ds.features().iter().map(|f| f.name.as_str()).collect();
            let want: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
            return Err(AnamError::SchemaMismatch(format!(
                "model expects features {want:?}, data has {names:?}"
            )));
        }
        match (self.uses_offset, ds.exposure().is_some()) {
            (true, false) => Err(AnamError::MissingExposure),
            (false, true) => Err(AnamError::SchemaMismatch(
                "data has an exposure column but the model has no offset".into(),
            )),
            _ => Ok(()),
        }
    }

    fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.features.len() {
            return Err(AnamError::SchemaMismatch(format!(
                "expected {} feature values, got {}",
                self.features.len(),
                x.len()
            )));
        }
        for (f, &v) in self.features.iter().zip(x) {
            let ok = match &f.kind {
                FeatureKind::Continuous => v.is_finite(),
                FeatureKind::Categorical { levels } => {
                    v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels.len()
                }
            };
            if !ok {
                return Err(AnamError::SchemaMismatch(format!(
                    "invalid value {v} for feature '{}'",
                    f.name
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn offset(&self, exposure: Option<f64>) -> Result<f64> {
        match (self.uses_offset, exposure) {
            (true, Some(e)) if e > 0.0 && e.is_finite() => Ok(e.ln()),
            (true, Some(e)) => Err(AnamError::InvalidExposure { row: 1, value: e }),
            (true, None) => Err(AnamError::MissingExposure),
            (false, None) => Ok(0.0),
            (false, Some(_)) => Err(AnamError::SchemaMismatch(
                "exposure given but the model has no offset".into(),
            )),
        }
    }

    pub fn predict(&self, x: &[f64], exposure: Option<f64>) -> Result<Prediction> {
        self.check_row(x)?;
        let offset = self.offset(exposure)?;
        let mut contributions = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let points: Vec<f64> = term.inputs.iter().map(|&j| x[j]).collect();
            let raw = term.forward(&points)?.0[0];
            contributions.push(term.weight * (raw - term.center));
        }
        let eta = self.bias + contributions.iter().sum::<f64>() + offset;
        Ok(Prediction {
            mu: self.mu(eta),
            eta,
            contributions,
        })
    }

    pub(crate) fn mu(&self, eta: f64) -> f64 {
        crate::distributions::link_apply(self.distribution.link, eta, self.clip)
    }

    /// Raw (unweighted, uncentred) values of term `t` on every row of `ds`.
    pub fn raw_term_values(&self, t: usize, ds: &Dataset) -> Result<Vec<f64>> {
        let term = &self.terms[t];
        let rows: Vec<usize> = (0..ds.n()).collect();
        let mut out = Vec::with_capacity(ds.n());
        for chunk in rows.chunks(EVAL_CHUNK) {
            let points = term.gather(ds.values(), ds.p(), chunk);
            out.extend(term.forward(&points)?.0);
        }
        Ok(out)
    }

    /// Centred, weighted values of term `t` on every row of `ds`.
    pub fn term_contributions(&self, t: usize, ds: &Dataset) -> Result<Vec<f64>> {
        let term = &self.terms[t];
        let mut v = self.raw_term_values(t, ds)?;
        for x in &mut v {
            *x = term.weight * (*x - term.center);
        }
        Ok(v)
    }

    pub fn predict_batch(&self, ds: &Dataset) -> Result<Predictions> {
        self.check_dataset(ds)?;
        let contributions = (0..self.terms.len())
            .map(|t| self.term_contributions(t, ds))
            .collect::<Result<Vec<_>>>()?;
        let mut eta = vec![self.bias; ds.n()];
        for c in &contributions {
            for (e, v) in eta.iter_mut().zip(c) {
                *e += v;
            }
        }
        if let Some(exp) = ds.exposure() {
            for (e, x) in eta.iter_mut().zip(exp) {
                *e += x.ln();
            }
        }
        let mu = eta.iter().map(|&e| self.mu(e)).collect();
        Ok(Predictions {
            mu,
            eta,
            contributions,
        })
    }

    /// Sets each term's centre to its raw training-sample mean and moves the
    /// difference into the bias, leaving every prediction unchanged.
    pub fn center_terms(&mut self, train: &Dataset) -> Result<()> {
        let all = vec![true; self.terms.len()];
        self.center_terms_masked(train, &all)
    }

    pub(crate) fn center_terms_masked(&mut self, train: &Dataset, active: &[bool]) -> Result<()> {
        if train.is_empty() {
            return Err(AnamError::InvalidArgument(
                "cannot centre terms on an empty dataset".into(),
            ));
        }
        for t in (0..self.terms.len()).filter(|&t| active[t]) {
            let raw = self.raw_term_values(t, train)?;
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let term = &mut self.terms[t];
            self.bias += term.weight * (mean - term.center);
            term.center = mean;
        }
        Ok(())
    }

    /// Variance score of each term, `sum(contribution^2) / (n - 1)`, sorted
    /// descending; ties keep declaration order.
    pub fn importance(&self, data: &Dataset) -> Result<Vec<(String, f64)>> {
        if data.n() < 2 {
            return Err(AnamError::InvalidArgument(
                "importance needs at least two rows".into(),
            ));
        }
        let denom = (data.n() - 1) as f64;
        let mut scores = (0..self.terms.len())
            .map(|t| {
                let c = self.term_contributions(t, data)?;
                Ok((self.terms[t].label(), c.iter().map(|v| v * v).sum::<f64>() / denom))
            })
            .collect::<Result<Vec<_>>>()?;
        scores.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(scores)
    }

    /// Number of scalar parameters: bias, then per term its weight and shape
    /// parameters.
    pub fn num_params(&self) -> usize {
        1 + self
            .terms
            .iter()
            .map(|t| 1 + t.param_blocks().iter().map(|b| b.len()).sum::<usize>())
            .sum::<usize>()
    }

    /// All trainable parameters flattened in [`AnamModel::num_params`] order.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        out.push(self.bias);
        for t in &self.terms {
            out.push(t.weight);
            for b in t.param_blocks() {
                out.extend_from_slice(b);
            }
        }
        out
    }

    pub fn set_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(AnamError::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                values.len()
            )));
        }
        self.bias = values[0];
        let mut pos = 1;
        for t in &mut self.terms {
            t.weight = values[pos];
            pos += 1;
            for b in t.param_blocks_mut() {
                b.copy_from_slice(&values[pos..pos + b.len()]);
                pos += b.len();
            }
        }
        Ok(())
    }

    /// Largest monotonicity violation over every lattice and calibrator.
    pub fn constraint_violation(&self) -> f64 {
        self.terms
            .iter()
            .map(Term::constraint_violation)
            .fold(0.0, f64::max)
    }

    /// Appends a freshly initialised term (used when screening pairs).
    pub(crate) fn add_term(&mut self, spec: TermSpec, train: &Dataset, seed: u64) -> Result<()> {
        let mut specs = self.term_specs();
        specs.push(spec.clone());
        // heredity and duplicate checks on the extended term list
        AnamModel::validate_specs(&specs, &self.features)?;
        let term_seed = derive_seed(seed, fnv1a(&spec.label()));
        let mut term = Term::build(spec, &self.features, train, term_seed)?;
        let raw = {
            let rows: Vec<usize> = (0..train.n()).collect();
            let mut out = Vec::with_capacity(train.n());
            for chunk in rows.chunks(EVAL_CHUNK) {
                out.extend(term.forward(&term.gather(train.values(), train.p(), chunk))?.0);
            }
            out
        };
        term.center = raw.iter().sum::<f64>() / raw.len() as f64;
        self.terms.push(term);
        Ok(())
    }

    fn validate_specs(specs: &[TermSpec], features: &[Feature]) -> Result<()> {
        let mut seen: Vec<Vec<String>> = Vec::new();
        for spec in specs {
            spec.validate(features)?;
            let key = unordered_key(&spec.kind);
            if seen.contains(&key) {
                return Err(AnamError::InvalidModel(format!(
                    "term '{}' is declared twice",
                    spec.label()
                )));
            }
            seen.push(key);
        }
        for spec in specs.iter().filter(|s| s.kind.is_pair()) {
            for name in spec.kind.features() {
                let parent = specs
                    .iter()
                    .any(|s| matches!(&s.kind, TermKind::Main { feature } if feature == name));
                if !parent {
                    return Err(AnamError::InvalidModel(format!(
                        "pair term '{}' needs main term '{name}' (strong heredity)",
                        spec.label()
                    )));
                }
            }
        }
        Ok(())
    }
}
