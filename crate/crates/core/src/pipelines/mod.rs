//! End-to-end experiments: configuration, the extraction pipelines, and
//! their CSV/JSON reports.

mod basic;
mod bfree;
pub mod config;
mod erg1;
mod pnt;
pub mod report;
mod sarnak;
pub mod window;

pub use basic::{average_pipeline, momo_pipeline};
pub use bfree::bfree_density_pipeline;
pub use config::{Experiment, ExperimentConfig, KappaMode, WeightsSpec};
pub use erg1::{dirichlet_kernel_sq, erg1_dictionary, erg1_pipeline, Observable};
pub use pnt::{pnt_from_set, pnt_pipeline};
pub use report::{PipelineReport, StageFailure, Trajectory};
pub use sarnak::{sarnak_density_pipeline, weighted_values};

use crate::arith::{build_arith_table, ArithTable};
use crate::error::Result;

/// Loads the configured table cache if it reaches `n_max`, otherwise sieves.
pub fn prepare_table(config: &ExperimentConfig, n_max: u64) -> Result<ArithTable> {
    if let Some(path) = &config.table {
        let t = ArithTable::load(path)?;
        if t.n_max() >= n_max {
            return Ok(t);
        }
        log::warn!("cached table reaches {} < {n_max}; sieving afresh", t.n_max());
    }
    build_arith_table(n_max, config.block_size)
}
