//! Monotone-capable shape functions: piecewise-linear input calibrators,
//! 1-D/2-D lattices with (bi)linear interpolation, pairwise monotonicity
//! constraints and Dykstra's alternating projection onto them.

mod calibrator;
mod constraints;
mod dykstra;
mod grid;

pub use calibrator::{Calibration, Calibrator};
pub use constraints::{build_constraints, ConstraintSet};
pub use dykstra::{dykstra_project, DykstraOutcome};
pub use grid::{LatticeEval, LatticeParams};

use serde::{Deserialize, Serialize};

/// Required direction of a shape function along one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    #[default]
    None,
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn is_constrained(self) -> bool {
        self != Monotonicity::None
    }
}

impl std::str::FromStr for Monotonicity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Monotonicity::None),
            "increasing" | "inc" => Ok(Monotonicity::Increasing),
            "decreasing" | "dec" => Ok(Monotonicity::Decreasing),
            other => Err(format!("unknown monotonicity '{other}'")),
        }
    }
}
