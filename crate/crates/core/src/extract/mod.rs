//! Set-building procedures that turn averaged smallness into sets of
//! (asymptotically) full logarithmic density.
//!
//! Every procedure returns a [`DensityCertificate`]: the set, its
//! log-density readings along a checkpoint grid, and the construction
//! parameters. A failed construction is a certificate with `failure` set and
//! whatever partial set could be assembled, not an `Err`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::averaging::{log_density_readings, CheckpointGrid};
use crate::error::{Error, Result};
use crate::set::IndexSet;
use crate::sum::NeumaierSum;

mod blocks;
mod davenport;
mod diagonal;
mod scaling;

pub use blocks::{diagonalize_blocks, BlockDiagonalization, BlockStage};
pub use davenport::{davenport_erdos_set, level_set};
pub use diagonal::{assemble_full_density_set, diagonalize_sets, nest};
pub use scaling::{mertens_dilate_check, nested_scaled_set, scaled_set};

/// Stage at which a construction could not be completed at finite scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionFailure {
    pub stage: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityCertificate {
    #[serde(rename = "set_encoding")]
    pub set: IndexSet,
    pub checkpoints: Vec<u64>,
    pub readings: Vec<f64>,
    pub witnesses: BTreeMap<String, Value>,
    pub failure: Option<ExtractionFailure>,
}

impl DensityCertificate {
    /// Certificate for `set` with readings along `grid`.
    pub fn new(set: IndexSet, grid: &CheckpointGrid) -> Result<Self> {
        if set.horizon() != grid.horizon() {
            return Err(Error::Invalid(format!(
                "set horizon {} differs from checkpoint horizon {}",
                set.horizon(),
                grid.horizon()
            )));
        }
        let readings = log_density_readings(&set, grid.points())?;
        Ok(DensityCertificate {
            set,
            checkpoints: grid.points().to_vec(),
            readings,
            witnesses: BTreeMap::new(),
            failure: None,
        })
    }

    pub fn with_witness(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.witnesses.insert(key.to_string(), value.into());
        self
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Reading at the last checkpoint.
    pub fn final_reading(&self) -> f64 {
        *self.readings.last().expect("grids are non-empty")
    }

    pub fn grid(&self) -> CheckpointGrid {
        CheckpointGrid::new(self.set.horizon(), self.checkpoints.clone()).expect("stored grid is valid")
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")))
    }
}

/// `{n : G(n) < sqrt(gamma)}`.
pub fn markov_set<G: Fn(u64) -> f64>(g: G, gamma: f64, grid: &CheckpointGrid) -> Result<DensityCertificate> {
    check_gamma(gamma)?;
    let threshold = gamma.sqrt();
    let set = IndexSet::from_predicate(grid.horizon(), |n| g(n) < threshold);
    Ok(DensityCertificate::new(set, grid)?.with_witness("gamma", gamma).with_witness("threshold", threshold))
}

/// `{N : (1/N) sum_{n<=N} F(n) <= sqrt(gamma)}`.
pub fn cesaro_threshold_set<F: Fn(u64) -> f64>(f: F, gamma: f64, grid: &CheckpointGrid) -> Result<DensityCertificate> {
    check_gamma(gamma)?;
    Ok(cesaro_threshold_set_at(f, gamma.sqrt(), grid)?.with_witness("gamma", gamma))
}

/// `{N : (1/N) sum_{n<=N} F(n) <= threshold}` for an arbitrary threshold.
pub fn cesaro_threshold_set_at<F: Fn(u64) -> f64>(
    f: F,
    threshold: f64,
    grid: &CheckpointGrid,
) -> Result<DensityCertificate> {
    let means = running_means(f, grid.horizon());
    let set = IndexSet::from_predicate(grid.horizon(), |n| means[n as usize - 1] <= threshold);
    Ok(DensityCertificate::new(set, grid)?.with_witness("threshold", threshold))
}

/// `means[N-1] = (1/N) sum_{n<=N} F(n)`.
pub fn running_means<F: Fn(u64) -> f64>(f: F, horizon: u64) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    (1..=horizon)
        .map(|n| {
            acc.add(f(n));
            acc.value() / n as f64
        })
        .collect()
}

/// Counts `n <= horizon` whose membership disagrees with `pred`.
pub fn membership_violations<P: FnMut(u64) -> bool>(set: &IndexSet, mut pred: P) -> u64 {
    (1..=set.horizon()).filter(|&n| set.contains(n) != pred(n)).count() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: u64) -> CheckpointGrid {
        CheckpointGrid::geometric(10, h, 4).unwrap()
    }

    #[test]
    fn markov_examples() {
        let g = grid(10_000);
        assert_eq!(markov_set(|_| 0.25, 0.25, &g).unwrap().set, IndexSet::full(10_000));
        assert!(markov_set(|_| 1.0, 0.25, &g).unwrap().set.is_empty());
        let odd = markov_set(|n| if n % 2 == 0 { 1.0 } else { 0.0 }, 0.25, &g).unwrap();
        assert_eq!(odd.set, IndexSet::from_predicate(10_000, |n| n % 2 == 1));
        assert!((odd.final_reading() - 0.5).abs() < 0.1);
        // the boundary value itself is excluded
        assert!(markov_set(|_| 0.5, 0.25, &g).unwrap().set.is_empty());
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(markov_set(|_| 0.0, bad, &g), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn cesaro_threshold_examples() {
        let g = grid(10_000);
        assert_eq!(cesaro_threshold_set(|_| 0.0, 0.5, &g).unwrap().set, IndexSet::full(10_000));
        let even = cesaro_threshold_set(|n| if n % 2 == 0 { 1.0 } else { 0.0 }, 0.36, &g).unwrap();
        assert_eq!(even.set, IndexSet::full(10_000));
        assert!(cesaro_threshold_set(|_| 1.0, 0.25, &g).unwrap().set.is_empty());
        // the boundary value itself is included
        assert_eq!(cesaro_threshold_set(|_| 0.5, 0.25, &g).unwrap().set.len(), 10_000);
        assert!(cesaro_threshold_set(|_| 0.0, 1.5, &g).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let g = grid(1000);
        let c = markov_set(|n| (n % 3) as f64 / 3.0, 0.25, &g).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"set_encoding\":{\"horizon\":1000,\"intervals\":"));
        let back: DensityCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        assert!(DensityCertificate::new(IndexSet::full(10), &g).is_err());
    }

    #[test]
    fn summation_by_parts_reduction() {
        // sum_{n<=N-1} G(n)/(n+1) = sum_{n<=N} F(n)/n - (1/N) sum_{n<=N} F(n), G the running mean
        let f = |n: u64| ((n * 7919) % 13) as f64 / 13.0;
        for big_n in [2u64, 10, 1000, 100_000] {
            let g = running_means(f, big_n);
            let mut lhs = NeumaierSum::new();
            for n in 1..big_n {
                lhs.add(g[n as usize - 1] / (n + 1) as f64);
            }
            let mut rhs = NeumaierSum::new();
            for n in 1..=big_n {
                rhs.add(f(n) / n as f64);
            }
            rhs.add(-g[big_n as usize - 1]);
            assert!((lhs.value() - rhs.value()).abs() < 1e-9, "N = {big_n}");
        }
    }

    #[test]
    fn violations_count() {
        let s = IndexSet::from_predicate(100, |n| n % 2 == 0);
        assert_eq!(membership_violations(&s, |n| n % 2 == 0), 0);
        assert_eq!(membership_violations(&s, |_| true), 50);
    }
}
