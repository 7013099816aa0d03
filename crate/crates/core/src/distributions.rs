//! Likelihoods and the log link.
//!
//! The Gamma family uses the mean-dispersion parameterisation: shape
//! `1/phi`, scale `mu * phi`, so `E[Y] = mu` and `Var[Y] = phi * mu^2`.

use serde::{Deserialize, Serialize};

use crate::error::{AnamError, Result};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Gamma { dispersion: f64 },
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[default]
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub link: Link,
}

/// Bounds applied to the mean after the inverse link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for ClipBounds {
    fn default() -> Self {
        ClipBounds {
            min: 1e-7,
            max: 1e30,
        }
    }
}

impl DistributionSpec {
    pub fn gamma(dispersion: f64) -> Self {
        DistributionSpec {
            family: Family::Gamma { dispersion },
            link: Link::Log,
        }
    }

    pub fn poisson() -> Self {
        DistributionSpec {
            family: Family::Poisson,
            link: Link::Log,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::Gamma { dispersion } = self.family {
            if !(dispersion > 0.0 && dispersion.is_finite()) {
                return Err(AnamError::InvalidConfig(format!(
                    "gamma dispersion must be positive, got {dispersion}"
                )));
            }
        }
        Ok(())
    }

    /// Same family with a different Gamma dispersion (no-op for Poisson).
    pub fn with_dispersion(self, dispersion: f64) -> Self {
        match self.family {
            Family::Gamma { .. } => DistributionSpec::gamma(dispersion),
            Family::Poisson => self,
        }
    }

    /// Negative log density and its derivative in `mu`.
    pub fn nll(&self, y: f64, mu: f64) -> Result<(f64, f64)> {
        match self.family {
            Family::Gamma { dispersion } => gamma_nll(y, mu, dispersion),
            Family::Poisson => poisson_nll(y, mu),
        }
    }

    /// Negative log density at `mu = clip(exp(eta))` and its derivative in
    /// `eta`. The derivative is zero where the clip is active. Inputs are not
    /// validated; this is the training hot path.
    #[inline]
    pub fn nll_eta(&self, y: f64, eta: f64, clip: ClipBounds) -> (f64, f64) {
        let raw = eta.exp();
        let mu = raw.clamp(clip.min, clip.max);
        let active = raw >= clip.min && raw <= clip.max;
        let (loss, dmu) = match self.family {
            Family::Gamma { dispersion } => gamma_nll_unchecked(y, mu, dispersion),
            Family::Poisson => poisson_nll_unchecked(y, mu),
        };
        (loss, if active { dmu * mu } else { 0.0 })
    }
}

#[inline]
fn gamma_nll_unchecked(y: f64, mu: f64, phi: f64) -> (f64, f64) {
    let k = 1.0 / phi;
    let loss = ln_gamma(k) + k * (mu * phi).ln() - (k - 1.0) * y.ln() + y / (mu * phi);
    let grad = k * (1.0 / mu - y / (mu * mu));
    (loss, grad)
}

#[inline]
fn poisson_nll_unchecked(y: f64, mu: f64) -> (f64, f64) {
    (mu - y * mu.ln() + ln_gamma(y + 1.0), 1.0 - y / mu)
}

/// `-log f(y)` for `Gamma(shape = 1/phi, scale = mu * phi)` and its
/// derivative in `mu`.
pub fn gamma_nll(y: f64, mu: f64, phi: f64) -> Result<(f64, f64)> {
    for (name, v) in [("y", y), ("mu", mu), ("phi", phi)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(AnamError::InvalidArgument(format!(
                "gamma likelihood needs positive finite {name}, got {v}"
            )));
        }
    }
    Ok(gamma_nll_unchecked(y, mu, phi))
}

/// `mu - y log mu + log y!` and its derivative `1 - y/mu`.
pub fn poisson_nll(y: f64, mu: f64) -> Result<(f64, f64)> {
    if !(y >= 0.0 && y.fract() == 0.0 && y.is_finite()) {
        return Err(AnamError::InvalidArgument(format!(
            "poisson response must be a non-negative integer, got {y}"
        )));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(AnamError::InvalidArgument(format!(
            "poisson mean must be positive, got {mu}"
        )));
    }
    Ok(poisson_nll_unchecked(y, mu))
}

/// Inverse link: `clip(exp(eta))`.
pub fn link_apply(link: Link, eta: f64, clip: ClipBounds) -> f64 {
    match link {
        Link::Log => eta.exp().clamp(clip.min, clip.max),
    }
}

/// Link: `log(mu)`.
pub fn link_invert(link: Link, mu: f64) -> Result<f64> {
    match link {
        Link::Log if mu > 0.0 => Ok(mu.ln()),
        Link::Log => Err(AnamError::InvalidArgument(format!(
            "log link needs a positive mean, got {mu}"
        ))),
    }
}
