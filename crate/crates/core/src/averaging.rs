//! Cesàro and logarithmic averages, density readings, summation by parts.
//!
//! Sequences are pull-based: any `Fn(u64) -> Complex64` indexed from 1. All
//! sums are compensated and every routine makes a single forward pass, so one
//! sweep can serve a whole list of checkpoints. `log` is the natural log.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::set::IndexSet;
use crate::sum::{ComplexSum, NeumaierSum};

/// Increasing checkpoints `N_1 < N_2 < ...` inside `[2, horizon]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointGrid {
    horizon: u64,
    points: Vec<u64>,
}

impl CheckpointGrid {
    pub fn new(horizon: u64, points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("checkpoint list is empty".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be strictly increasing".into()));
        }
        if points[0] < 2 {
            return Err(Error::Invalid("checkpoints must be at least 2".into()));
        }
        if *points.last().unwrap() > horizon {
            return Err(Error::Invalid(format!("checkpoint beyond horizon {horizon}")));
        }
        Ok(CheckpointGrid { horizon, points })
    }

    /// Roughly `per_decade` log-spaced points from `start` up to and
    /// including `horizon`.
    pub fn geometric(start: u64, horizon: u64, per_decade: u32) -> Result<Self> {
        if start < 2 || start > horizon || per_decade == 0 {
            return Err(Error::Invalid(format!(
                "bad geometric grid start={start} horizon={horizon} per_decade={per_decade}"
            )));
        }
        let ratio = 10f64.powf(1.0 / per_decade as f64);
        let mut points = Vec::new();
        let mut x = start as f64;
        while (x.round() as u64) < horizon {
            let p = x.round() as u64;
            if points.last() != Some(&p) {
                points.push(p);
            }
            x *= ratio;
        }
        points.push(horizon);
        CheckpointGrid::new(horizon, points)
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn last(&self) -> u64 {
        *self.points.last().unwrap()
    }
}

/// `(1/N) sum_{n<=N} a_n`.
pub fn cesaro_avg<A: Fn(u64) -> Complex64>(a: A, n: u64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = ComplexSum::new();
    for k in 1..=n {
        acc.add(a(k));
    }
    acc.value() / n as f64
}

/// `(1/log N) sum_{n<=N} a_n / n`; needs `N >= 2`.
pub fn log_avg<A: Fn(u64) -> Complex64>(a: A, n: u64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Domain(format!("logarithmic average needs N >= 2, got {n}")));
    }
    let mut acc = ComplexSum::new();
    for k in 1..=n {
        acc.add(a(k) / k as f64);
    }
    Ok(acc.value() / (n as f64).ln())
}

/// Both sides of the summation-by-parts identity
/// `sum_{n<=N} a_n/n = sum_{n<=N-1} s_n/(n(n+1)) + s_N/N`, `s_n = sum_{j<=n} a_j`.
pub fn summation_by_parts<A: Fn(u64) -> Complex64>(a: A, n: u64) -> (Complex64, Complex64) {
    let mut lhs = ComplexSum::new();
    let mut rhs = ComplexSum::new();
    let mut s = ComplexSum::new();
    for k in 1..=n {
        let ak = a(k);
        lhs.add(ak / k as f64);
        s.add(ak);
        if k < n {
            let kf = k as f64;
            rhs.add(s.value() / kf / (kf + 1.0));
        }
    }
    if n >= 1 {
        rhs.add(s.value() / n as f64);
    }
    (lhs.value(), rhs.value())
}

/// `(1/log N) sum_{n<=N, n∈S} 1/n`.
pub fn log_density_at(set: &IndexSet, n: u64) -> Result<f64> {
    check_range(n, 2, set.horizon())?;
    Ok(log_density_readings(set, &[n])?[0])
}

/// Log-density readings of `set` at each of `checkpoints` (increasing), one pass.
pub fn log_density_readings(set: &IndexSet, checkpoints: &[u64]) -> Result<Vec<f64>> {
    if let Some(&last) = checkpoints.last() {
        check_range(last, 2, set.horizon())?;
    }
    if checkpoints.windows(2).any(|w| w[0] > w[1]) || checkpoints.first().is_some_and(|&c| c < 2) {
        return Err(Error::Invalid("checkpoints must be non-decreasing and >= 2".into()));
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = NeumaierSum::new();
    let mut members = set.iter().peekable();
    for &cp in checkpoints {
        while let Some(&m) = members.peek() {
            if m > cp {
                break;
            }
            acc.add(1.0 / m as f64);
            members.next();
        }
        out.push(acc.value() / (cp as f64).ln());
    }
    Ok(out)
}

/// `|S ∩ [1, N]| / N`.
pub fn natural_density_at(set: &IndexSet, n: u64) -> Result<f64> {
    check_range(n, 1, set.horizon())?;
    Ok(set.count_up_to(n) as f64 / n as f64)
}

/// The three terms bounding `|log_avg(a, N)|` when the Cesàro averages are
/// split over `good` and its complement:
///
/// 1. `C / log N`,
/// 2. `(C / log N) * sum_{n<=N, n∉good} 1/n`,
/// 3. `|(1/log N) * sum_{n<=N-1, n∈good} E_n/(n+1)|`,
///
/// with `E_n` the Cesàro average at `n` and `C = max_{n<=N} |E_n|`.
pub fn transfer_diagnostic<A: Fn(u64) -> Complex64>(a: A, good: &IndexSet, n: u64) -> Result<[f64; 3]> {
    if n < 2 {
        return Err(Error::Domain(format!("transfer diagnostic needs N >= 2, got {n}")));
    }
    check_range(n, 2, good.horizon())?;
    let mut s = ComplexSum::new();
    let mut c = 0f64;
    let mut bad = NeumaierSum::new();
    let mut good_part = ComplexSum::new();
    for k in 1..=n {
        s.add(a(k));
        let e = s.value() / k as f64;
        c = c.max(e.norm());
        if good.contains(k) {
            if k < n {
                good_part.add(e / (k as f64 + 1.0));
            }
        } else {
            bad.add(1.0 / k as f64);
        }
    }
    let log_n = (n as f64).ln();
    Ok([c / log_n, c / log_n * bad.value(), good_part.value().norm() / log_n])
}

/// Cesàro and logarithmic averages along a list of checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingReport {
    pub checkpoints: Vec<u64>,
    pub cesaro_values: Vec<Complex64>,
    pub log_values: Vec<Complex64>,
}

pub const AVERAGING_CSV_HEADER: &str = "N,re_cesaro,im_cesaro,re_log,im_log";

impl AveragingReport {
    /// Streams `a` once up to the last checkpoint.
    pub fn compute<A: Fn(u64) -> Complex64>(a: A, grid: &CheckpointGrid) -> Self {
        let mut cesaro_values = Vec::with_capacity(grid.points().len());
        let mut log_values = Vec::with_capacity(grid.points().len());
        let mut plain = ComplexSum::new();
        let mut harmonic = ComplexSum::new();
        let mut next = grid.points().iter().peekable();
        for k in 1..=grid.last() {
            let v = a(k);
            plain.add(v);
            harmonic.add(v / k as f64);
            if next.peek() == Some(&&k) {
                cesaro_values.push(plain.value() / k as f64);
                log_values.push(harmonic.value() / (k as f64).ln());
                next.next();
            }
        }
        AveragingReport { checkpoints: grid.points().to_vec(), cesaro_values, log_values }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{AVERAGING_CSV_HEADER}")?;
        for ((n, c), l) in self.checkpoints.iter().zip(&self.cesaro_values).zip(&self.log_values) {
            writeln!(w, "{n},{},{},{},{}", c.re, c.im, l.re, l.im)?;
        }
        Ok(())
    }
}
