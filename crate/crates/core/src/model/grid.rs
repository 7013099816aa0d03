use std::fmt::Write as _;
use std::path::Path;

use super::anam::AnamModel;
use crate::data::FeatureKind;
use crate::error::{AnamError, Result};
use crate::fsutil::write_atomic;

pub const MAIN_GRID_POINTS: usize = 1000;
pub const PAIR_GRID_POINTS: usize = 100;

/// A term evaluated on a regular grid. Pair grids are row-major: the first
/// input varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGrid {
    pub term: String,
    /// Level names per input (`None` for continuous inputs).
    pub levels: Vec<Option<Vec<String>>>,
    pub axes: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// `n` uniformly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

impl AnamModel {
    /// Evaluates the centred term `label` over the training range of its
    /// inputs, `resolution` points per continuous axis. Categorical axes
    /// enumerate their levels.
    pub fn export_shape_grid(&self, label: &str, resolution: usize) -> Result<ShapeGrid> {
        let t = self
            .term_index(label)
            .ok_or_else(|| AnamError::UnknownTerm(label.to_string()))?;
        if resolution == 0 {
            return Err(AnamError::InvalidArgument("grid resolution must be positive".into()));
        }
        let term = &self.terms()[t];
        let mut axes = Vec::new();
        let mut levels = Vec::new();
        for &j in term.inputs() {
            match &self.features()[j].kind {
                FeatureKind::Continuous => {
                    let (lo, hi) = self.feature_range(j);
                    axes.push(linspace(lo, hi, resolution));
                    levels.push(None);
                }
                FeatureKind::Categorical { levels: names } => {
                    axes.push((0..names.len()).map(|l| l as f64).collect());
                    levels.push(Some(names.clone()));
                }
            }
        }
        let points: Vec<Vec<f64>> = match axes.as_slice() {
            [a] => a.iter().map(|&v| vec![v]).collect(),
            [a, b] => a
                .iter()
                .flat_map(|&u| b.iter().map(move |&v| vec![u, v]))
                .collect(),
            _ => unreachable!("terms have one or two inputs"),
        };
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        let raw = term.forward(&flat)?.0;
        let values = raw
            .iter()
            .map(|r| term.weight() * (r - term.center()))
            .collect();
        Ok(ShapeGrid {
            term: term.label(),
            levels,
            axes,
            points,
            values,
        })
    }
}

impl ShapeGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.axes.len() {
            1 => out.push_str("input1,value\n"),
            _ => out.push_str("input1,input2,value\n"),
        }
        for (point, value) in self.points.iter().zip(&self.values) {
            for (d, &v) in point.iter().enumerate() {
                match &self.levels[d] {
                    Some(names) => out.push_str(&names[v as usize]),
                    None => write!(out, "{v}").expect("string write"),
                }
                out.push(',');
            }
            writeln!(out, "{value}").expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}
