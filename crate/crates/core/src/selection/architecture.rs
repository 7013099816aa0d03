use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::lattice::Monotonicity;
use crate::mlp::Activation;
use crate::model::{Backend, TermKind, TermSpec};

/// How a term over given features is built: MLP sizes, lattice sizes and
/// the features that carry shape requirements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Architecture {
    pub main_layers: usize,
    pub main_width: usize,
    pub pair_layers: usize,
    pub pair_width: usize,
    pub main_lattice_vertices: usize,
    pub lattice_vertices: usize,
    pub calibrator_knots: usize,
    pub activation: Activation,
    /// Features whose effects must be monotone; these use lattices.
    pub monotone: BTreeMap<String, Monotonicity>,
    /// Main effects that receive the smoothness penalty.
    pub smooth: Vec<String>,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            main_layers: 2,
            main_width: 20,
            pair_layers: 10,
            pair_width: 100,
            main_lattice_vertices: 10,
            lattice_vertices: 8,
            calibrator_knots: 20,
            activation: Activation::default(),
            monotone: BTreeMap::new(),
            smooth: Vec::new(),
        }
    }
}

impl Architecture {
    fn direction(&self, feature: &str) -> Monotonicity {
        self.monotone.get(feature).copied().unwrap_or_default()
    }

    pub fn main_spec(&self, feature: &str, with_smooth: bool) -> TermSpec {
        let dir = self.direction(feature);
        let backend = if dir.is_constrained() {
            Backend::Lattice {
                vertices: self.main_lattice_vertices,
                calibrator_knots: self.calibrator_knots,
            }
        } else {
            Backend::Mlp {
                hidden_layers: self.main_layers,
                first_width: self.main_width,
                activation: self.activation,
            }
        };
        TermSpec {
            kind: TermKind::Main {
                feature: feature.to_string(),
            },
            backend,
            monotonicity: vec![dir],
            smooth: with_smooth && self.smooth.iter().any(|s| s == feature),
        }
    }

    pub fn pair_spec(&self, first: &str, second: &str) -> TermSpec {
        let dirs = vec![self.direction(first), self.direction(second)];
        let backend = if dirs.iter().any(|d| d.is_constrained()) {
            Backend::Lattice {
                vertices: self.lattice_vertices,
                calibrator_knots: self.calibrator_knots,
            }
        } else {
            Backend::Mlp {
                hidden_layers: self.pair_layers,
                first_width: self.pair_width,
                activation: self.activation,
            }
        };
        TermSpec {
            kind: TermKind::Pair {
                first: first.to_string(),
                second: second.to_string(),
            },
            backend,
            monotonicity: dirs,
            smooth: false,
        }
    }

    pub fn specs(&self, mains: &[String], pairs: &[(String, String)], with_smooth: bool) -> Vec<TermSpec> {
        mains
            .iter()
            .map(|m| self.main_spec(m, with_smooth))
            .chain(pairs.iter().map(|(a, b)| self.pair_spec(a, b)))
            .collect()
    }
}
