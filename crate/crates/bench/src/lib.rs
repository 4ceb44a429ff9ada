//! Shared inputs for the benchmarks.

use momo_core::arith::{build_arith_table, ArithTable};
use momo_core::Complex64;

/// Sieved table reaching `n`, built once per benchmark group.
pub fn table(n: u64) -> ArithTable {
    build_arith_table(n, 1 << 16).expect("benchmark table")
}

/// `μ(n)` as complex values for `n = 1..=len`.
pub fn mu_values(table: &ArithTable, len: u64) -> Vec<Complex64> {
    (1..=len).map(|n| Complex64::new(table.mu(n) as f64, 0.0)).collect()
}
