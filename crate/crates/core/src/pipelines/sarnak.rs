use num_complex::Complex64;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{PipelineReport, Trajectory};
use super::window::{bound_chain, cesaro_prefix, reported_members, reverify_members, window_extraction};
use crate::arith::ArithTable;
use crate::error::{Error, Result};

/// `v_n = w(n) f(T^n x)` for `n = 1..=len`.
pub fn weighted_values(config: &ExperimentConfig, table: &ArithTable, len: u64) -> Result<(Vec<Complex64>, f64)> {
    if table.n_max() < len {
        return Err(Error::Range { value: len, min: 1, max: table.n_max() });
    }
    let system = config.system.build(len)?;
    let weights = config.weights;
    let values: Vec<Complex64> = (1..=len).into_par_iter().map(|n| system.eval(n) * weights.weight(table, n)).collect();
    let w_max = match weights {
        super::config::WeightsSpec::Zero => 0.0,
        _ => 1.0,
    };
    Ok((values, system.bound() * w_max))
}

/// Extracts a set `A` along which `(1/N) sum_{n<=N} w(n) f(T^n x)` is
/// controlled by the windowed moments, and checks the bound chain at every
/// reported member.
///
/// The table must reach `horizon + max H`.
pub fn sarnak_density_pipeline(config: &ExperimentConfig, table: &ArithTable) -> Result<PipelineReport> {
    config.validate()?;
    let grid = config.grid()?;
    let mut report = PipelineReport::new("extract", config.echo());
    let (values, sup_v) = weighted_values(config, table, config.horizon + config.max_h())?;
    let ex = window_extraction(&values, config.phi, &config.h_schedule, &config.h0_schedule, &grid)?;
    let prefix = cesaro_prefix(&values, config.horizon);

    let members = reported_members(&ex.assembled.set, &grid);
    let (bounds, violations) = bound_chain(&ex, &prefix, sup_v, &members);
    let reverify = reverify_members(&ex, &values, config.seed);

    let mut density = Trajectory::new(&["N", "log_density"]);
    for (n, r) in ex.assembled.checkpoints.iter().zip(&ex.assembled.readings) {
        density.push(vec![*n as f64, *r]);
    }
    let mut rtab = Trajectory::new(&["H", "R"]);
    for (h, r) in ex.r() {
        rtab.push(vec![h as f64, r]);
    }

    report.scalar("final_reading", ex.assembled.final_reading());
    report.scalar("bound_violations", violations as f64);
    report.scalar("reverify_violations", reverify as f64);
    report.scalar("sup_v", sup_v);
    if let Some(last) = bounds.rows.last() {
        report.scalar("last_abs_cesaro", last[1]);
        report.scalar("last_bound", last[3]);
    }
    report.trajectories.insert("bounds".into(), bounds);
    report.trajectories.insert("density".into(), density);
    report.trajectories.insert("r".into(), rtab);
    report.trajectories.insert("window".into(), ex.window_trajectory());
    if let Some(f) = &ex.assembled.failure {
        report.fail("diagonalize", format!("stage {}: {}", f.stage, f.reason));
    }
    if violations > 0 {
        report.fail("bound_chain", format!("{violations} reported members exceed the bound"));
    }
    if reverify > 0 {
        report.fail("reverify", format!("{reverify} sampled members fail the membership predicate"));
    }
    report.certificates.insert("A".into(), ex.assembled);
    Ok(report)
}
