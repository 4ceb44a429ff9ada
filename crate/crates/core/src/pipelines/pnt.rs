use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{PipelineReport, Trajectory};
use super::window::{
    bound_chain, cesaro_prefix, reported_members, reverify_members, window_extraction, REVERIFY_SAMPLES,
};
use crate::arith::ArithTable;
use crate::error::{Error, Result};
use crate::extract::{mertens_dilate_check, nested_scaled_set, DensityCertificate};
use crate::momo::Phi;
use crate::set::IndexSet;

/// Second-moment window readings for `μ`, extraction of `A` with small
/// `|M(N)|/N`, the dilated set `Ã`, the Mertens dilation check, and `ψ(x)/x`
/// along `Ã`. The table must reach `horizon + max H`.
pub fn pnt_pipeline(table: &ArithTable, config: &ExperimentConfig) -> Result<PipelineReport> {
    config.validate()?;
    let grid = config.grid()?;
    let len = config.horizon + config.max_h();
    if table.n_max() < len {
        return Err(Error::Range { value: len, min: 1, max: table.n_max() });
    }
    let values: Vec<Complex64> = (1..=len).into_par_iter().map(|n| Complex64::new(table.mu(n) as f64, 0.0)).collect();
    let ex = window_extraction(&values, Phi::Square, &config.h_schedule, &config.h0_schedule, &grid)?;
    let prefix = cesaro_prefix(&values, config.horizon);
    let (bounds, bound_bad) = bound_chain(&ex, &prefix, 1.0, &reported_members(&ex.assembled.set, &grid));
    let reverify = reverify_members(&ex, &values, config.seed);

    let mut report = PipelineReport::new("pnt", config.echo());
    let mut chowla = Trajectory::new(&["H", "chowla2"]);
    for (h, r) in ex.r() {
        chowla.push(vec![h as f64, r]);
    }
    report.trajectories.insert("chowla".into(), chowla);
    report.trajectories.insert("window".into(), ex.window_trajectory());
    report.trajectories.insert("bounds".into(), bounds);
    report.scalar("a_reading", ex.assembled.final_reading());
    report.scalar("bound_violations", bound_bad as f64);
    report.scalar("reverify_violations", reverify as f64);
    if let Some(f) = &ex.assembled.failure {
        report.fail("extract", format!("stage {}: {}", f.stage, f.reason));
    }
    if bound_bad + reverify > 0 {
        report.fail("reverify", "bound chain or membership violated");
    }
    let a = ex.assembled;
    pnt_from_set(table, a, config, &mut report)?;
    Ok(report)
}

/// The steps of [`pnt_pipeline`] after `A` is known; lets a caller inject `A`.
pub fn pnt_from_set(
    table: &ArithTable,
    a: DensityCertificate,
    config: &ExperimentConfig,
    report: &mut PipelineReport,
) -> Result<()> {
    let grid = config.grid()?;
    let horizon = config.horizon;
    let tilde = nested_scaled_set(&a.set, config.m_max, &grid)?;
    if let Some(f) = &tilde.failure {
        report.fail("nested", format!("stage {}: {}", f.stage, f.reason));
    }

    // containment: past N_m, floor(x/k) ∈ A for every k <= m
    let switch: Vec<u64> = serde_json::from_value(tilde.witnesses["switch_points"].clone()).unwrap_or_default();
    let members: Vec<u64> = tilde.set.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let containment_bad = members
        .choose_multiple(&mut rng, REVERIFY_SAMPLES)
        .filter(|&&x| {
            switch.iter().enumerate().any(|(i, &nm)| x >= nm && (1..=i as u64 + 1).any(|k| !a.set.contains(x / k)))
        })
        .count();

    let u = |x: f64| table.mertens_real(x).map(|m| m as f64).unwrap_or(f64::NAN);
    let witness = mertens_dilate_check(&tilde.set, u, config.dilate_a, config.dilate_eps, horizon)?;
    let rescan_bad =
        witness.map_or(0, |x| rescan_dilate(&tilde.set, table, config.dilate_a, config.dilate_eps, x, horizon));
    match witness {
        Some(x) => report.scalar("dilate_x", x as f64),
        None => {
            report.fail("dilate", format!("no X <= {horizon} for a = {}, eps = {}", config.dilate_a, config.dilate_eps))
        }
    }

    let mut psi = Trajectory::new(&["x", "psi_over_x"]);
    let mut top = tilde.set.largest(10);
    top.sort_unstable();
    let mut worst = 0f64;
    for &x in &top {
        let r = table.chebyshev_psi(x)? / x as f64;
        worst = worst.max((r - 1.0).abs());
        psi.push(vec![x as f64, r]);
    }
    let mut density = Trajectory::new(&["N", "a_reading", "tilde_reading"]);
    for ((n, ra), rt) in a.checkpoints.iter().zip(&a.readings).zip(&tilde.readings) {
        density.push(vec![*n as f64, *ra, *rt]);
    }

    report.scalar("psi_horizon", table.chebyshev_psi(horizon)? / horizon as f64);
    report.scalar("psi_max_deviation_top10", worst);
    report.scalar("tilde_reading", tilde.final_reading());
    report.scalar("containment_violations", containment_bad as f64);
    report.scalar("dilate_rescan_violations", rescan_bad as f64);
    report.scalar("abs_mertens_over_n", (table.mertens(horizon)? as f64 / horizon as f64).abs());
    if containment_bad + rescan_bad as usize > 0 {
        report.fail("reverify", "containment or dilation rescan violated");
    }
    report.trajectories.insert("density".into(), density);
    report.trajectories.insert("psi".into(), psi);
    report.certificates.insert("A".into(), a);
    report.certificates.insert("A_tilde".into(), tilde);
    Ok(())
}

/// Second scan of the dilation witness with exact integer Mertens values.
fn rescan_dilate(set: &IndexSet, table: &ArithTable, a: u64, eps: f64, x0: u64, horizon: u64) -> u64 {
    (x0..=horizon)
        .filter(|&x| set.contains(x))
        .filter(|&x| {
            let total: i64 = (1..=a)
                .map(|n| if x / n == 0 { 0 } else { table.mertens(x / n).map_or(i64::MAX / 32, |m| m.abs()) })
                .sum();
            total as f64 > eps * x as f64
        })
        .count() as u64
}
