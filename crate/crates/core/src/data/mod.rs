//! Tabular data: schemas, loading, preprocessing, splitting and the synthetic
//! severity generator.

mod dataset;
mod io;
mod preprocess;
mod schema;
mod split;
pub mod synthetic;

pub use dataset::{Dataset, Feature};
pub use io::{load_csv, write_csv};
pub use preprocess::{
    iqr_bounds, preprocess, quantile, ColumnStats, IqrReport, PreprocessOptions, PreprocessReport,
    SdDivisor,
};
pub use schema::{ColumnSpec, FeatureKind, Role, Schema};
pub use split::{split, SplitSpec};
pub use synthetic::{ground_truth_terms, simulate, GroundTruth, SyntheticConfig};
