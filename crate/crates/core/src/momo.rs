//! Orthogonality statistics: weighted averages, grid-sup norms, strong MOMO
//! block sums, and the windowed moment `R_f(H)`.
//!
//! Weights are `Fn(u64) -> f64` with values in `[-1, 1]`, usually μ from an
//! [`ArithTable`](crate::arith::ArithTable). C(X) norms are replaced by the
//! maximum over a finite family of starting points, which is a lower bound
//! for the true norm.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{BlockPartition, ObservableSystem, SharedSystem};
use crate::error::{Error, Result};
use crate::sum::{ComplexSum, NeumaierSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `1 / b_{K+1}`
    Cesaro,
    /// `1 / log b_{K+1}`, inner terms weighted by `1/n`
    Logarithmic,
}

/// A strong MOMO reading after `blocks` blocks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomoStat {
    pub blocks: usize,
    /// `b_{K+1}`
    pub end: u64,
    pub value: f64,
    pub normalization: Normalization,
}

/// The convex gauge applied to window averages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phi {
    Identity,
    Square,
}

impl Phi {
    #[inline]
    pub fn apply(self, s: f64) -> f64 {
        match self {
            Phi::Identity => s,
            Phi::Square => s * s,
        }
    }

    /// `ψ(s) = φ^{-1}(sqrt s)`, the rate at which Cesàro averages along an
    /// extracted set are controlled by a reading `s`.
    pub fn rate(self, s: f64) -> f64 {
        match self {
            Phi::Identity => s.max(0.0).sqrt(),
            Phi::Square => s.max(0.0).sqrt().sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Phi::Identity => "identity",
            Phi::Square => "square",
        }
    }
}

impl std::str::FromStr for Phi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" | "s" => Ok(Phi::Identity),
            "square" | "s2" => Ok(Phi::Square),
            other => Err(Error::Config(format!("unknown phi '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStatConfig {
    pub h: u64,
    pub phi: Phi,
    pub checkpoints: Vec<u64>,
}

impl WindowStatConfig {
    pub fn new(h: u64, phi: Phi, checkpoints: Vec<u64>) -> Result<Self> {
        if h == 0 {
            return Err(Error::Invalid("window length H must be at least 1".into()));
        }
        if checkpoints.is_empty() || checkpoints[0] < 2 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be increasing and >= 2".into()));
        }
        Ok(WindowStatConfig { h, phi, checkpoints })
    }
}

/// `(1/N) sum_{n<=N} w(n) f(T^n x)`.
pub fn weighted_cesaro<W>(system: &dyn ObservableSystem, weights: W, n: u64) -> Complex64
where
    W: Fn(u64) -> f64,
{
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = ComplexSum::new();
    for k in 1..=n {
        let w = weights(k);
        if w != 0.0 {
            acc.add(system.eval(k) * w);
        }
    }
    acc.value() / n as f64
}

/// `(1/log N) sum_{n<=N} w(n) f(T^n x) / n`.
pub fn weighted_log<W>(system: &dyn ObservableSystem, weights: W, n: u64) -> Result<Complex64>
where
    W: Fn(u64) -> f64,
{
    if n < 2 {
        return Err(Error::Domain(format!("logarithmic average needs N >= 2, got {n}")));
    }
    let mut acc = ComplexSum::new();
    for k in 1..=n {
        let w = weights(k);
        if w != 0.0 {
            acc.add(system.eval(k) * (w / k as f64));
        }
    }
    Ok(acc.value() / (n as f64).ln())
}

/// `max_x |weighted_cesaro|` over a family of starting points.
pub fn uniform_norm_avg<W>(family: &[SharedSystem], weights: W, n: u64) -> Result<f64>
where
    W: Fn(u64) -> f64 + Sync,
{
    if family.is_empty() {
        return Err(Error::Invalid("uniform norm needs a non-empty family".into()));
    }
    let values: Vec<f64> = family.par_iter().map(|s| weighted_cesaro(s.as_ref(), &weights, n).norm()).collect();
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Per-block inner sums `sum_{b_k<=n<b_{k+1}} w(n) f(T^{n-b_k} x_k)` (with an
/// extra `1/n` for the logarithmic form), for the first `blocks` blocks.
pub fn block_sums<W>(
    partition: &BlockPartition,
    block_systems: &[SharedSystem],
    weights: W,
    blocks: usize,
    normalization: Normalization,
) -> Result<Vec<Complex64>>
where
    W: Fn(u64) -> f64 + Sync,
{
    if blocks > partition.blocks() || blocks > block_systems.len() {
        return Err(Error::Invalid(format!(
            "{blocks} blocks requested, partition has {} and {} systems given",
            partition.blocks(),
            block_systems.len()
        )));
    }
    let starts = partition.starts();
    Ok((0..blocks)
        .into_par_iter()
        .map(|k| {
            let (lo, hi) = (starts[k], starts[k + 1]);
            let sys = &block_systems[k];
            let mut acc = ComplexSum::new();
            for n in lo..hi {
                let w = weights(n);
                if w == 0.0 {
                    continue;
                }
                let scale = match normalization {
                    Normalization::Cesaro => w,
                    Normalization::Logarithmic => w / n as f64,
                };
                acc.add(sys.eval(n - lo) * scale);
            }
            acc.value()
        })
        .collect())
}

/// Strong MOMO statistic over the first `k` blocks.
pub fn strong_momo_stat<W>(
    partition: &BlockPartition,
    block_systems: &[SharedSystem],
    weights: W,
    k: usize,
    normalization: Normalization,
) -> Result<MomoStat>
where
    W: Fn(u64) -> f64 + Sync,
{
    Ok(*strong_momo_trajectory(partition, block_systems, weights, &[k], normalization)?.last().unwrap())
}

/// Strong MOMO statistic at several block counts, one sweep.
pub fn strong_momo_trajectory<W>(
    partition: &BlockPartition,
    block_systems: &[SharedSystem],
    weights: W,
    ks: &[usize],
    normalization: Normalization,
) -> Result<Vec<MomoStat>>
where
    W: Fn(u64) -> f64 + Sync,
{
    if ks.is_empty() || ks[0] == 0 || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("block counts must be increasing and positive".into()));
    }
    let sums = block_sums(partition, block_systems, weights, *ks.last().unwrap(), normalization)?;
    let starts = partition.starts();
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(ks.len());
    let mut next = ks.iter().peekable();
    for (i, s) in sums.iter().enumerate() {
        acc.add(s.norm());
        let k = i + 1;
        if next.peek() == Some(&&k) {
            let end = starts[k];
            let denom = match normalization {
                Normalization::Cesaro => end as f64,
                Normalization::Logarithmic => (end as f64).ln(),
            };
            out.push(MomoStat { blocks: k, end, value: acc.value() / denom, normalization });
            next.next();
        }
    }
    Ok(out)
}

/// Both sides of the block-telescoping identity on `[lo, hi)`:
///
/// `(1/b) sum_{lo<=n<hi} = (1/b) sum_{1<=n<hi} - (a/b)(1/a) sum_{1<=n<lo}`
///
/// with `a, b = lo, hi` (Cesàro) or `log lo, log hi` (logarithmic, where the
/// summands also carry `1/n`). Returns `(lhs, rhs)`.
pub fn telescoping_check<W>(
    weights: W,
    system: &dyn ObservableSystem,
    lo: u64,
    hi: u64,
    normalization: Normalization,
) -> Result<(Complex64, Complex64)>
where
    W: Fn(u64) -> f64,
{
    if lo == 0 || lo >= hi {
        return Err(Error::Invalid(format!("need 1 <= b_k < b_(k+1), got {lo}, {hi}")));
    }
    let term = |n: u64| {
        let w = weights(n);
        let v = system.eval(n) * w;
        match normalization {
            Normalization::Cesaro => v,
            Normalization::Logarithmic => v / n as f64,
        }
    };
    let sum = |from: u64, to: u64| {
        let mut acc = ComplexSum::new();
        for n in from..to {
            acc.add(term(n));
        }
        acc.value()
    };
    let scale = |b: u64| match normalization {
        Normalization::Cesaro => b as f64,
        Normalization::Logarithmic => (b as f64).ln(),
    };
    let lhs = sum(lo, hi) / scale(hi);
    let whole = sum(1, hi) / scale(hi);
    // an empty prefix (lo = 1) contributes nothing; its log scale would be 0
    let prefix = if lo == 1 { Complex64::new(0.0, 0.0) } else { sum(1, lo) / scale(lo) * (scale(lo) / scale(hi)) };
    Ok((lhs, whole - prefix))
}

/// Number of steps between exact recomputations of a sliding window sum.
const WINDOW_REFRESH: u64 = 1024;

/// `F(n) = max_{v ∈ family} |(1/H) sum_{1<=h<=H} v(n+h)|` for `n = 1..=len`;
/// entry `n - 1` holds `F(n)`. Needs every `v` defined up to `len + H`.
pub fn window_norms<V>(family: &[V], h: u64, len: u64) -> Result<Vec<f64>>
where
    V: Fn(u64) -> Complex64 + Sync,
{
    if h == 0 {
        return Err(Error::Invalid("window length H must be at least 1".into()));
    }
    if family.is_empty() {
        return Err(Error::Invalid("window norms need a non-empty family".into()));
    }
    let per_member: Vec<Vec<f64>> = family.par_iter().map(|v| single_window_norms(v, h, len)).collect();
    let mut out = per_member[0].clone();
    for other in &per_member[1..] {
        for (o, x) in out.iter_mut().zip(other) {
            *o = o.max(*x);
        }
    }
    Ok(out)
}

fn single_window_norms<V: Fn(u64) -> Complex64>(v: &V, h: u64, len: u64) -> Vec<f64> {
    let exact = |n: u64| {
        let mut acc = ComplexSum::new();
        for j in 1..=h {
            acc.add(v(n + j));
        }
        acc.value()
    };
    let hf = h as f64;
    let mut out = Vec::with_capacity(len as usize);
    let mut window = Complex64::new(0.0, 0.0);
    for n in 1..=len {
        if (n - 1) % WINDOW_REFRESH == 0 {
            window = exact(n);
        } else {
            window += v(n + h) - v(n);
        }
        out.push(window.norm() / hf);
    }
    out
}

/// `(1/log N) sum_{n<=N} φ(F(n)) / n` at each checkpoint, from precomputed
/// window norms (`norms[n-1] = F(n)`).
pub fn window_stat_from_norms(norms: &[f64], phi: Phi, checkpoints: &[u64]) -> Result<Vec<f64>> {
    if let Some(&last) = checkpoints.last() {
        if last as usize > norms.len() {
            return Err(Error::Range { value: last, min: 2, max: norms.len() as u64 });
        }
    }
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for (i, &f) in norms.iter().enumerate() {
        let n = i as u64 + 1;
        acc.add(phi.apply(f) / n as f64);
        while next.peek() == Some(&&n) {
            out.push(acc.value() / (n as f64).ln());
            next.next();
        }
        if next.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

/// `(1/log N) sum_{n<=N} (1/n) φ(|(1/H) sum_{1<=h<=H} v(n+h)|)`.
pub fn window_stat<V>(v: V, h: u64, phi: Phi, n: u64) -> Result<f64>
where
    V: Fn(u64) -> Complex64 + Sync,
{
    if n < 2 {
        return Err(Error::Domain(format!("window statistic needs N >= 2, got {n}")));
    }
    let norms = window_norms(&[v], h, n)?;
    Ok(window_stat_from_norms(&norms, phi, &[n])?[0])
}

/// Trajectory of the windowed statistic over the configured checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStatReport {
    pub h: u64,
    pub phi: Phi,
    pub checkpoints: Vec<u64>,
    pub values: Vec<f64>,
    /// Maximum over the checkpoint values; the finite stand-in for a limsup.
    pub limsup: f64,
}

pub fn window_stat_report<V>(v: V, config: &WindowStatConfig) -> Result<WindowStatReport>
where
    V: Fn(u64) -> Complex64 + Sync,
{
    let last = *config.checkpoints.last().unwrap();
    let norms = window_norms(&[v], config.h, last)?;
    Ok(report_from_norms(&norms, config))
}

pub(crate) fn report_from_norms(norms: &[f64], config: &WindowStatConfig) -> WindowStatReport {
    let values = window_stat_from_norms(norms, config.phi, &config.checkpoints).expect("norms cover checkpoints");
    let limsup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    WindowStatReport { h: config.h, phi: config.phi, checkpoints: config.checkpoints.clone(), values, limsup }
}

/// Second-moment window statistic, `window_stat` with `φ(s) = s²`.
pub fn chowla2_window<C>(c: C, h: u64, n: u64) -> Result<f64>
where
    C: Fn(u64) -> Complex64 + Sync,
{
    window_stat(c, h, Phi::Square, n)
}

/// JSON summary line for one statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub stat: String,
    #[serde(rename = "H")]
    pub h: u64,
    pub phi: Phi,
    #[serde(rename = "N")]
    pub n: u64,
    pub value: f64,
}
