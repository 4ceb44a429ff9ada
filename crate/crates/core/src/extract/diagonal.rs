use log::warn;
use serde_json::json;

use super::{DensityCertificate, ExtractionFailure};
use crate::averaging::{log_density_readings, CheckpointGrid};
use crate::error::{Error, Result};
use crate::set::IndexSet;

/// `M_1, M_1 ∩ M_2, M_1 ∩ M_2 ∩ M_3, ...`
pub fn nest(family: &[IndexSet]) -> Vec<IndexSet> {
    let mut out: Vec<IndexSet> = Vec::with_capacity(family.len());
    for m in family {
        let mut next = m.clone();
        if let Some(prev) = out.last() {
            next.intersect_with(prev);
        }
        out.push(next);
    }
    out
}

/// Glues a nested family into one set whose log density is driven to 1.
///
/// `s_k` is the least checkpoint index (not below `s_{k-1}`) from which the
/// reading of the nested `M_k` stays at least `1 - 1/k`. With `N_k` the
/// checkpoint at `s_k`, the set is `M_1` on `[1, N_1)`, `M_k` on
/// `[N_{k-1}, N_k)` and the last `M_k` from the last switch point on. So
/// `set ∩ [N_k, horizon] ⊆ M_k` for every `k`.
pub fn diagonalize_sets(family: &[IndexSet], grid: &CheckpointGrid) -> Result<DensityCertificate> {
    if family.is_empty() {
        return Err(Error::Invalid("diagonalization needs at least one set".into()));
    }
    if let Some(bad) = family.iter().find(|m| m.horizon() != grid.horizon()) {
        return Err(Error::Invalid(format!(
            "set horizon {} differs from checkpoint horizon {}",
            bad.horizon(),
            grid.horizon()
        )));
    }
    let nested = nest(family);
    let points = grid.points();

    let mut switch_idx: Vec<usize> = Vec::new();
    let mut thresholds = Vec::new();
    let mut failure = None;
    for (i, m) in nested.iter().enumerate() {
        let k = i + 1;
        let threshold = 1.0 - 1.0 / k as f64;
        let readings = log_density_readings(m, points)?;
        // first index after the last checkpoint that falls below the threshold
        let from = readings.iter().rposition(|&r| r < threshold).map_or(0, |p| p + 1);
        let s = from.max(switch_idx.last().copied().unwrap_or(0));
        if s >= points.len() {
            failure = Some(ExtractionFailure {
                stage: k,
                reason: format!(
                    "reading of M_{k} is {:.6} < {threshold:.6} at the last checkpoint",
                    readings.last().unwrap()
                ),
            });
            break;
        }
        switch_idx.push(s);
        thresholds.push(threshold);
    }

    let used = switch_idx.len();
    let horizon = grid.horizon();
    // piece i is nested[i] on [bounds[i], bounds[i+1])
    let mut bounds = vec![1u64];
    bounds.extend(switch_idx.iter().take(used.saturating_sub(1)).map(|&s| points[s]));
    bounds.push(horizon + 1);
    let mut set = IndexSet::empty(horizon);
    for i in 0..used {
        let (lo, hi) = (bounds[i], bounds[i + 1]);
        if hi > lo {
            let mut piece = nested[i].clone();
            piece.remove_range(1, lo - 1);
            piece.remove_range(hi, horizon);
            set.union_with(&piece);
        }
    }
    let points_at: Vec<u64> = switch_idx.iter().map(|&s| points[s]).collect();
    let mut cert = DensityCertificate::new(set, grid)?
        .with_witness("switch_indices", json!(switch_idx))
        .with_witness("switch_points", json!(points_at))
        .with_witness("thresholds", json!(thresholds));
    cert.failure = failure;
    Ok(cert)
}

/// Prunes each member set below `H²`, forms `⋃_{H >= H0}` for each `H0` in
/// the schedule and diagonalizes the resulting family.
///
/// `r` holds the `(H, R(H))` readings aligned with `member_sets`.
pub fn assemble_full_density_set(
    r: &[(u64, f64)],
    member_sets: &[DensityCertificate],
    h0_schedule: &[u64],
    grid: &CheckpointGrid,
) -> Result<DensityCertificate> {
    if r.is_empty() || r.len() != member_sets.len() {
        return Err(Error::Invalid("R readings and member sets must be non-empty and aligned".into()));
    }
    if r.windows(2).any(|w| w[0].0 >= w[1].0) || r[0].0 == 0 {
        return Err(Error::Invalid("H values must be positive and increasing".into()));
    }
    if h0_schedule.is_empty() || h0_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("H0 schedule must be non-empty and increasing".into()));
    }
    if let Some(&h0) = h0_schedule.iter().find(|&&h0| h0 > r.last().unwrap().0) {
        return Err(Error::Invalid(format!("H0 = {h0} exceeds every H in the schedule")));
    }
    let tail = r.len() / 2;
    if r[tail..].windows(2).any(|w| w[1].1 > w[0].1) {
        warn!("R(H) readings are not non-increasing on the tail of the H schedule");
    }
    let horizon = grid.horizon();
    let pruned: Vec<IndexSet> = r
        .iter()
        .zip(member_sets)
        .map(|(&(h, _), cert)| {
            let mut s = cert.set.clone();
            s.remove_range(1, h.saturating_mul(h).saturating_sub(1).min(horizon));
            s
        })
        .collect();
    let family: Vec<IndexSet> = h0_schedule
        .iter()
        .map(|&h0| {
            let mut u = IndexSet::empty(horizon);
            for ((h, _), s) in r.iter().zip(&pruned) {
                if *h >= h0 {
                    u.union_with(s);
                }
            }
            u
        })
        .collect();
    let hs: Vec<u64> = r.iter().map(|p| p.0).collect();
    let rs: Vec<f64> = r.iter().map(|p| p.1).collect();
    Ok(diagonalize_sets(&family, grid)?
        .with_witness("h_schedule", json!(hs))
        .with_witness("r_readings", json!(rs))
        .with_witness("h0_schedule", json!(h0_schedule)))
}
