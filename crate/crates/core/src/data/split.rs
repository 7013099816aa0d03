use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{AnamError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train_frac,
            val_frac,
            test_frac,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The 60:20:20 split.
    pub fn standard(seed: u64) -> Self {
        SplitSpec {
            train_frac: 0.6,
            val_frac: 0.2,
            test_frac: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(AnamError::InvalidSplit(format!(
                "fractions must be positive, got {fracs:?}"
            )));
        }
        let total: f64 = fracs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AnamError::InvalidSplit(format!(
                "fractions sum to {total}, not 1"
            )));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes for `n` rows: validation and test get
    /// `floor(n * frac)`, training takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The small slack keeps products like 0.29 * 100 from flooring to 28.
        let size = |f: f64| ((n as f64) * f + 1e-9).floor() as usize;
        let val = size(self.val_frac);
        let test = size(self.test_frac);
        (n - val - test, val, test)
    }
}

/// Random partition into training, validation and test sets. Rows keep their
/// original relative order inside each part.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    spec.validate()?;
    let n = ds.n();
    if n < 3 {
        return Err(AnamError::InvalidSplit(format!("need at least 3 rows, got {n}")));
    }
    let (n_train, n_val, _) = spec.sizes(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(spec.seed, rng::streams::SPLIT));
    let mut train = order[..n_train].to_vec();
    let mut val = order[n_train..n_train + n_val].to_vec();
    let mut test = order[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&val), ds.subset(&test)))
}
