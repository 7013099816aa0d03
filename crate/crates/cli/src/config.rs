use std::path::Path;

use anam_core::data::{PreprocessOptions, SyntheticConfig};
use anam_core::distributions::DistributionSpec;
use anam_core::lattice::Monotonicity;
use anam_core::selection::{Architecture, Keep, SelectionConfig};
use anam_core::train::{OptimizerKind, TrainConfig};
use anam_core::{AnamError, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

/// Everything a subcommand may need, read from `--config` and then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub synthetic: SyntheticConfig,
    pub preprocess: PreprocessOptions,
    /// Train / validation / test fractions.
    pub split: [f64; 3],
    pub distribution: DistributionSpec,
    pub selection: SelectionConfig,
    pub architecture: Architecture,
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            synthetic: SyntheticConfig::default(),
            preprocess: PreprocessOptions::default(),
            split: [0.6, 0.2, 0.2],
            distribution: DistributionSpec::gamma(1.0),
            selection: SelectionConfig::default(),
            architecture: Architecture::default(),
            train: TrainConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| AnamError::io(p, e))?;
                serde_json::from_str(&text)
                    .map_err(|e| AnamError::InvalidConfig(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.synthetic.validate()?;
        self.distribution.validate()?;
        self.train.validate()?;
        self.selection.train.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Gamma,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Rmsprop,
}

/// Hyperparameter flags shared by the model-fitting subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct HyperFlags {
    /// Hidden layers of main-effect networks.
    #[arg(long)]
    pub main_layers: Option<usize>,
    /// Width of the first hidden layer of main-effect networks.
    #[arg(long)]
    pub main_width: Option<usize>,
    /// Hidden layers of pairwise networks.
    #[arg(long)]
    pub pair_layers: Option<usize>,
    /// Width of the first hidden layer of pairwise networks.
    #[arg(long)]
    pub pair_width: Option<usize>,
    /// Knots per input calibrator of lattice terms.
    #[arg(long)]
    pub calibrator_knots: Option<usize>,
    /// Vertices per dimension of pairwise lattices.
    #[arg(long)]
    pub lattice_vertices: Option<usize>,
    /// Marginal-clarity penalty strength.
    #[arg(long)]
    pub omega_mc: Option<f64>,
    /// Smoothness penalty strength.
    #[arg(long)]
    pub omega_smooth: Option<f64>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Maximum number of epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Minibatch size.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Early-stopping patience in epochs.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub optimizer: Option<OptimizerArg>,
    /// Monotone feature, as NAME=increasing or NAME=decreasing (repeatable).
    #[arg(long, value_name = "NAME=DIR")]
    pub monotone: Vec<String>,
    /// Main effects receiving the smoothness penalty (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub smooth: Vec<String>,
    /// Response distribution.
    #[arg(long)]
    pub family: Option<FamilyArg>,
    /// Gamma dispersion used during training.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Ensemble members for main-effect screening.
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Keep this many top-ranked main effects.
    #[arg(long)]
    pub top_mains: Option<usize>,
    /// Keep this many top-ranked pairs.
    #[arg(long)]
    pub top_pairs: Option<usize>,
}

fn parse_monotone(item: &str) -> Result<(String, Monotonicity)> {
    let (name, dir) = item
        .split_once('=')
        .ok_or_else(|| AnamError::InvalidConfig(format!("--monotone expects NAME=DIR, got '{item}'")))?;
    let dir = match dir {
        "increasing" | "inc" => Monotonicity::Increasing,
        "decreasing" | "dec" => Monotonicity::Decreasing,
        "none" => Monotonicity::None,
        other => {
            return Err(AnamError::InvalidConfig(format!(
                "unknown monotonicity '{other}' for {name}"
            )))
        }
    };
    Ok((name.to_string(), dir))
}

impl HyperFlags {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let monotone = self
            .monotone
            .iter()
            .map(|m| parse_monotone(m))
            .collect::<Result<Vec<_>>>()?;
        for arch in [&mut cfg.architecture, &mut cfg.selection.screening] {
            set(&mut arch.main_layers, self.main_layers);
            set(&mut arch.main_width, self.main_width);
            set(&mut arch.pair_layers, self.pair_layers);
            set(&mut arch.pair_width, self.pair_width);
            set(&mut arch.calibrator_knots, self.calibrator_knots);
            set(&mut arch.lattice_vertices, self.lattice_vertices);
            for (name, dir) in &monotone {
                arch.monotone.insert(name.clone(), *dir);
            }
        }
        if !self.smooth.is_empty() {
            cfg.architecture.smooth = self.smooth.clone();
        }
        for tc in [&mut cfg.train, &mut cfg.selection.train] {
            set(&mut tc.learning_rate, self.lr);
            set(&mut tc.max_epochs, self.epochs);
            set(&mut tc.batch_size, self.batch);
            set(&mut tc.patience, self.patience);
            if let Some(o) = self.optimizer {
                tc.optimizer = match o {
                    OptimizerArg::Adam => OptimizerKind::adam(),
                    OptimizerArg::Rmsprop => OptimizerKind::rmsprop(),
                };
            }
        }
        set(&mut cfg.selection.pair_patience, self.patience);
        set(&mut cfg.train.omega_mc, self.omega_mc);
        set(&mut cfg.train.omega_smooth, self.omega_smooth);
        set(&mut cfg.selection.ensemble_size, self.ensemble);
        if let Some(k) = self.top_mains {
            cfg.selection.k1 = Keep::Top(k);
        }
        if let Some(k) = self.top_pairs {
            cfg.selection.k2 = Keep::Top(k);
        }
        match self.family {
            Some(FamilyArg::Gamma) => {
                cfg.distribution = DistributionSpec::gamma(self.phi.unwrap_or(1.0));
            }
            Some(FamilyArg::Poisson) => cfg.distribution = DistributionSpec::poisson(),
            None => {
                if let Some(phi) = self.phi {
                    cfg.distribution = cfg.distribution.with_dispersion(phi);
                }
            }
        }
        Ok(())
    }
}

/// Seeds every random component from one value.
pub fn apply_seed(cfg: &mut RunConfig, seed: Option<u64>) {
    if let Some(s) = seed {
        cfg.synthetic.seed = s;
        cfg.selection.seed = s;
        cfg.selection.train.seed = s;
        cfg.train.seed = s;
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
