//! The additive model: terms assembled around a bias, a log link and an
//! optional exposure offset.

mod anam;
mod grid;
mod multi;
mod term;

pub use anam::{AnamModel, Prediction, Predictions};
pub use grid::{linspace, ShapeGrid, MAIN_GRID_POINTS, PAIR_GRID_POINTS};
pub use multi::MultiOutputModel;
pub use term::{Backend, LatticeShape, Shape, Term, TermCache, TermGrad, TermKind, TermSpec};
