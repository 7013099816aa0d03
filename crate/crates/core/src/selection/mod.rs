//! Three-stage term selection: main effects by ensemble variance, pairs by
//! validation gain over a frozen baseline, then joint fine-tuning.

mod architecture;
mod parallel;
mod stages;

pub use architecture::Architecture;
pub use parallel::run_indexed;
pub use stages::{
    fine_tune, select_main, select_pairs, Keep, PairDelta, SelectionConfig, SelectionReport,
};
