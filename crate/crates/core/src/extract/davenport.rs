use serde_json::json;

use super::{running_means, DensityCertificate, ExtractionFailure};
use crate::averaging::CheckpointGrid;
use crate::error::{Error, Result};
use crate::set::IndexSet;
use crate::sum::NeumaierSum;

/// `{N <= horizon : (1/N) sum_{n<=N} a_n > level}`.
pub fn level_set<A: Fn(u64) -> f64>(a: A, level: f64, horizon: u64) -> IndexSet {
    let mut acc = NeumaierSum::new();
    IndexSet::from_predicate(horizon, |n| {
        acc.add(a(n));
        acc.value() / n as f64 > level
    })
}

/// Set along which the Cesàro means of `a` approach their upper limit.
///
/// The limsup is read as `ℓ = max` of the Cesàro mean over the grid. For
/// each `ε_k`, `B_k = {N : mean_N > ℓ - ε_k}`, and `N_k` is the least
/// integer above `N_{k-1}` from which every log-density reading of `B_k`
/// (at every integer up to the horizon) is at least `1 - ε_k`. The result
/// is `B_1` on `[1, N_2)`, `B_k` on `[N_k, N_{k+1})` and the last `B_k`
/// to the horizon.
pub fn davenport_erdos_set<A: Fn(u64) -> f64>(a: A, eps: &[f64], grid: &CheckpointGrid) -> Result<DensityCertificate> {
    if eps.is_empty() || eps.iter().any(|&e| e.is_nan() || e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon schedule must be positive and strictly decreasing".into()));
    }
    let horizon = grid.horizon();
    let means = running_means(a, horizon);
    let ell = grid.points().iter().map(|&n| means[n as usize - 1]).fold(f64::NEG_INFINITY, f64::max);

    let mut pieces: Vec<IndexSet> = Vec::new();
    let mut switch: Vec<u64> = Vec::new();
    let mut failure = None;
    for (i, &e) in eps.iter().enumerate() {
        let b = IndexSet::from_predicate(horizon, |n| means[n as usize - 1] > ell - e);
        let last_bad = last_low_reading(&b, 1.0 - e);
        let n_k = (last_bad + 1).max(switch.last().map_or(2, |&p| p + 1)).max(2);
        if n_k > horizon {
            failure = Some(ExtractionFailure {
                stage: i + 1,
                reason: format!("log-density reading of B_eps for eps = {e} stays below {} up to the horizon", 1.0 - e),
            });
            break;
        }
        switch.push(n_k);
        pieces.push(b);
    }

    let mut set = IndexSet::empty(horizon);
    for (i, piece) in pieces.iter().enumerate() {
        let lo = if i == 0 { 1 } else { switch[i] };
        let hi = switch.get(i + 1).copied().unwrap_or(horizon + 1);
        let mut p = piece.clone();
        p.remove_range(1, lo - 1);
        p.remove_range(hi, horizon);
        set.union_with(&p);
    }
    let mut cert = DensityCertificate::new(set, grid)?
        .with_witness("ell", ell)
        .with_witness("eps", json!(eps))
        .with_witness("switch_points", json!(switch));
    cert.failure = failure;
    Ok(cert)
}

/// Largest `N >= 2` at which the log-density reading of `set` is below
/// `threshold`, or 1 if there is none.
fn last_low_reading(set: &IndexSet, threshold: f64) -> u64 {
    let mut acc = NeumaierSum::new();
    let mut last = 1;
    for n in 1..=set.horizon() {
        if set.contains(n) {
            acc.add(1.0 / n as f64);
        }
        if n >= 2 && acc.value() / (n as f64).ln() < threshold {
            last = n;
        }
    }
    last
}
