use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Family};
use crate::error::{AnamError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nll: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_test: usize,
    pub distribution: DistributionSpec,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str = "model,n_test,family,dispersion,nll,rmse,mae";

    pub fn csv_row(&self, model: &str) -> String {
        let (family, phi) = match self.distribution.family {
            Family::Gamma { dispersion } => ("gamma", dispersion.to_string()),
            Family::Poisson => ("poisson", String::new()),
        };
        format!(
            "{model},{},{family},{phi},{},{},{}",
            self.n_test, self.nll, self.rmse, self.mae
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:>12}", "n", self.n_test)?;
        writeln!(f, "{:<6} {:>12.6}", "NLL", self.nll)?;
        writeln!(f, "{:<6} {:>12.6}", "RMSE", self.rmse)?;
        write!(f, "{:<6} {:>12.6}", "MAE", self.mae)
    }
}

/// NLL, RMSE and MAE of predictions `mu_hat` against `y`.
///
/// `mu_hat` is the mean per unit exposure; when `exposure` is given the
/// expected value of row `i` is `mu_hat[i] * exposure[i]`.
pub fn compute_metrics(
    y: &[f64],
    mu_hat: &[f64],
    dist: DistributionSpec,
    exposure: Option<&[f64]>,
) -> Result<MetricsReport> {
    if y.len() != mu_hat.len() || exposure.is_some_and(|e| e.len() != y.len()) {
        return Err(AnamError::InvalidArgument(format!(
            "metric inputs differ in length: {} responses, {} predictions",
            y.len(),
            mu_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(AnamError::InvalidArgument("no rows to evaluate".into()));
    }
    dist.validate()?;
    let n = y.len() as f64;
    let (mut nll, mut se, mut ae) = (0.0, 0.0, 0.0);
    for i in 0..y.len() {
        let mean = mu_hat[i] * exposure.map_or(1.0, |e| e[i]);
        nll += dist.nll(y[i], mean)?.0;
        let err = y[i] - mean;
        se += err * err;
        ae += err.abs();
    }
    Ok(MetricsReport {
        nll: nll / n,
        rmse: (se / n).sqrt(),
        mae: ae / n,
        n_test: y.len(),
        distribution: dist,
    })
}

/// Pearson estimate `sum((y - mu)^2 / mu^2) / (n - p_eff)`.
pub fn estimate_dispersion(y: &[f64], mu_hat: &[f64], p_eff: usize) -> Result<f64> {
    if y.len() != mu_hat.len() {
        return Err(AnamError::InvalidArgument("dispersion inputs differ in length".into()));
    }
    if y.len() < 2 || y.len() <= p_eff {
        return Err(AnamError::InvalidArgument(format!(
            "dispersion needs more than max(1, {p_eff}) rows, got {}",
            y.len()
        )));
    }
    let mut sum = 0.0;
    for (&yi, &mi) in y.iter().zip(mu_hat) {
        if !(mi > 0.0) {
            return Err(AnamError::InvalidArgument(format!(
                "dispersion needs positive predictions, got {mi}"
            )));
        }
        let r = (yi - mi) / mi;
        sum += r * r;
    }
    Ok(sum / (y.len() - p_eff) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_unit_errors() {
        let g = DistributionSpec::gamma(1.0);
        let m = compute_metrics(&[1.0, 2.0], &[1.0, 2.0], g, None).unwrap();
        assert_eq!((m.rmse, m.mae), (0.0, 0.0));
        let p = DistributionSpec::poisson();
        let m = compute_metrics(&[0.0, 2.0], &[1.0, 1.0], p, None).unwrap();
        assert_eq!((m.rmse, m.mae), (1.0, 1.0));
        let m = compute_metrics(&[1.0], &[1.0], g, None).unwrap();
        assert_eq!(m.nll, 1.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = DistributionSpec::gamma(1.0);
        assert!(compute_metrics(&[1.0, 2.0], &[1.0], g, None).is_err());
    }

    #[test]
    fn exposure_scales_the_mean() {
        let p = DistributionSpec::poisson();
        let m = compute_metrics(&[2.0], &[1.0], p, Some(&[2.0])).unwrap();
        assert_eq!(m.rmse, 0.0);
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(estimate_dispersion(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1).unwrap(), 0.0);
        let mu = [1.0, 2.0, 4.0, 3.0];
        let y = [1.5, 1.0, 5.0, 2.0];
        let y2: Vec<f64> = y.iter().zip(&mu).map(|(a, m)| m + 2.0 * (a - m)).collect();
        let a = estimate_dispersion(&y, &mu, 1).unwrap();
        let b = estimate_dispersion(&y2, &mu, 1).unwrap();
        assert!((b - 4.0 * a).abs() < 1e-12);
        assert!(estimate_dispersion(&[1.0, 1.0], &[1.0, 0.0], 0).is_err());
    }
}
