//! Numerical toolkit for Möbius orthogonality experiments.
//!
//! Segmented sieves for μ and Λ, Cesàro and logarithmic averages, a small
//! zoo of zero-entropy dynamical systems, orthogonality statistics, and the
//! set-extraction procedures that turn averaged estimates into sets of full
//! logarithmic density.

pub mod arith;
pub mod averaging;
pub mod dynsys;
pub mod error;
pub mod extract;
pub mod momo;
pub mod pipelines;
pub mod set;
pub mod sum;

pub use arith::{build_arith_table, ArithTable, MultipleBase, SieveConfig};
pub use averaging::CheckpointGrid;
pub use dynsys::{BlockPartition, ObservableSystem, SharedSystem, SystemDescriptor};
pub use error::{Error, Result};
pub use extract::DensityCertificate;
pub use num_complex::Complex64;
pub use set::IndexSet;
