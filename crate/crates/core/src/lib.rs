//! Interpretable additive models for insurance pricing.
//!
//! A model is a bias plus a sum of per-feature and pairwise shape functions
//! passed through a log link. Each shape function is either a small
//! feed-forward network ([`mlp`]) or a calibrated lattice ([`lattice`]) that
//! can be constrained to be monotone. Training ([`train`]) minimises a
//! penalised likelihood with projected adaptive gradient steps, and
//! [`selection`] implements the staged main-effect / interaction screening.

pub mod archive;
pub mod bits;
pub mod data;
pub mod distributions;
pub mod error;
pub mod eval;
pub mod fsutil;
pub mod lattice;
pub mod mlp;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod selection;
pub mod special;
pub mod train;

pub use error::{AnamError, ErrorKind, Result};
