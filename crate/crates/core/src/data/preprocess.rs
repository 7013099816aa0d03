use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Feature};
use super::schema::FeatureKind;
use crate::error::{AnamError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessOptions {
    pub standardize: bool,
    pub one_hot: bool,
    pub iqr_filter: bool,
}

/// Divisor used for the standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdDivisor {
    /// `n - 1` (sample standard deviation).
    #[serde(rename = "n-1")]
    Sample,
    /// `n` (population standard deviation).
    #[serde(rename = "n")]
    Population,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqrReport {
    pub q1: f64,
    pub q3: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Statistics fitted by [`preprocess`], reusable on held-out data via
/// [`PreprocessReport::apply`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub options: PreprocessOptions,
    pub sd_divisor: SdDivisor,
    /// Standardisation statistics, one per continuous feature (empty when
    /// standardisation is off).
    pub columns: Vec<ColumnStats>,
    pub iqr: Option<IqrReport>,
    pub removed_rows: usize,
}

/// Linear-interpolation quantile of sorted data (the "type 7" definition).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Tukey fences `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]` of `values`.
pub fn iqr_bounds(values: &[f64]) -> IqrReport {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    IqrReport {
        q1,
        q3,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    }
}

/// Filters response outliers, standardises continuous features and optionally
/// expands categorical features into indicator columns.
///
/// The returned report holds the fitted statistics; apply it to validation and
/// test data with [`PreprocessReport::apply`].
pub fn preprocess(ds: &Dataset, opts: PreprocessOptions) -> Result<(Dataset, PreprocessReport)> {
    let mut data = ds.clone();
    let mut iqr = None;
    let mut removed = 0;
    if opts.iqr_filter && !ds.is_empty() {
        let fences = iqr_bounds(ds.response());
        let keep: Vec<usize> = (0..ds.n())
            .filter(|&i| {
                let y = ds.response()[i];
                y >= fences.lower && y <= fences.upper
            })
            .collect();
        removed = ds.n() - keep.len();
        data = ds.subset(&keep);
        iqr = Some(fences);
    }

    let mut columns = Vec::new();
    if opts.standardize {
        for (j, feat) in data.features().iter().enumerate() {
            if feat.kind.is_categorical() {
                continue;
            }
            let col = data.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let sd = (ss / (n - 1.0)).sqrt();
            if !(sd > 0.0 && sd.is_finite()) {
                return Err(AnamError::ZeroVariance(feat.name.clone()));
            }
            columns.push(ColumnStats {
                name: feat.name.clone(),
                mean,
                sd,
            });
        }
    }
    let report = PreprocessReport {
        options: opts,
        sd_divisor: SdDivisor::Sample,
        columns,
        iqr,
        removed_rows: removed,
    };
    let out = report.apply(&data)?;
    Ok((out, report))
}

impl PreprocessReport {
    /// Applies the fitted standardisation and encoding (never the outlier
    /// filter) to another dataset with the same features.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let mut features: Vec<Feature> = Vec::new();
        // For each source feature: optional standardisation and output width.
        let mut plan: Vec<(Option<(f64, f64)>, Option<usize>)> = Vec::new();
        for feat in ds.features() {
            match &feat.kind {
                FeatureKind::Continuous => {
                    let stats = if self.options.standardize {
                        let s = self
                            .columns
                            .iter()
                            .find(|c| c.name == feat.name)
                            .ok_or_else(|| {
                                AnamError::SchemaMismatch(format!(
                                    "no standardisation statistics for '{}'",
                                    feat.name
                                ))
                            })?;
                        Some((s.mean, s.sd))
                    } else {
                        None
                    };
                    plan.push((stats, None));
                    features.push(feat.clone());
                }
                FeatureKind::Categorical { levels } if self.options.one_hot => {
                    plan.push((None, Some(levels.len())));
                    for level in levels {
                        features.push(Feature::continuous(&format!("{}={}", feat.name, level)));
                    }
                }
                FeatureKind::Categorical { .. } => {
                    plan.push((None, None));
                    features.push(feat.clone());
                }
            }
        }
        let mut x = Vec::with_capacity(ds.n() * features.len());
        for i in 0..ds.n() {
            for (&v, (stats, onehot)) in ds.row(i).iter().zip(&plan) {
                match (stats, onehot) {
                    (Some((mean, sd)), _) => x.push((v - mean) / sd),
                    (None, Some(k)) => {
                        let hot = v as usize;
                        x.extend((0..*k).map(|l| if l == hot { 1.0 } else { 0.0 }));
                    }
                    (None, None) => x.push(v),
                }
            }
        }
        Dataset::with_names(
            features,
            x,
            ds.response().to_vec(),
            ds.exposure().map(<[f64]>::to_vec),
            ds.response_name().to_string(),
            ds.exposure_name().map(str::to_string),
        )
    }
}
