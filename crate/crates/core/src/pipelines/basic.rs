use super::config::ExperimentConfig;
use super::report::{PipelineReport, Trajectory};
use super::sarnak::weighted_values;
use crate::arith::ArithTable;
use crate::averaging::{summation_by_parts, AveragingReport};
use crate::dynsys::{rotation_grid, InnerKind, SystemDescriptor};
use crate::error::{Error, Result};
use crate::momo::{
    strong_momo_trajectory, telescoping_check, uniform_norm_avg, window_norms, window_stat_from_norms, Normalization,
    StatSummary,
};

/// Cesàro and logarithmic averages of `w(n) f(T^n x)` along the checkpoints.
pub fn average_pipeline(config: &ExperimentConfig, table: &ArithTable) -> Result<PipelineReport> {
    config.validate()?;
    let grid = config.grid()?;
    let (values, _) = weighted_values(config, table, config.horizon)?;
    let v = |n: u64| values[n as usize - 1];
    let avg = AveragingReport::compute(v, &grid);
    let mut t = Trajectory::new(&["N", "re_cesaro", "im_cesaro", "re_log", "im_log"]);
    for ((n, c), l) in avg.checkpoints.iter().zip(&avg.cesaro_values).zip(&avg.log_values) {
        t.push(vec![*n as f64, c.re, c.im, l.re, l.im]);
    }
    let (lhs, rhs) = summation_by_parts(v, config.horizon);
    let mut report = PipelineReport::new("average", config.echo());
    report.scalar("abs_cesaro", avg.cesaro_values.last().unwrap().norm());
    report.scalar("abs_log", avg.log_values.last().unwrap().norm());
    report.scalar("sbp_gap", (lhs - rhs).norm());
    report.trajectories.insert("averages".into(), t);
    Ok(report)
}

/// Strong MOMO trajectories (both normalizations) for a block orbit, the
/// telescoping identity on every block, a grid-sup norm for rotations, and
/// the windowed moment over the H schedule.
pub fn momo_pipeline(config: &ExperimentConfig, table: &ArithTable) -> Result<PipelineReport> {
    config.validate()?;
    let orbit = config.system.build_blocks()?;
    let partition = orbit.partition();
    let systems = orbit.systems();
    let w = |n: u64| config.weights.weight(table, n);
    let end = *partition.starts().last().unwrap() - 1;
    if end > table.n_max() {
        return Err(Error::Range { value: end, min: 1, max: table.n_max() });
    }

    let starts = partition.starts();
    let mut ks: Vec<usize> = config
        .grid()?
        .points()
        .iter()
        .filter_map(|&n| starts.partition_point(|&b| b <= n).checked_sub(1).filter(|&k| k > 0))
        .collect();
    ks.push(partition.blocks());
    ks.sort_unstable();
    ks.dedup();
    let ks: Vec<usize> = ks.into_iter().filter(|&k| k <= partition.blocks()).collect();

    let mut traj = Trajectory::new(&["K", "b_next", "cesaro", "logarithmic"]);
    let ces = strong_momo_trajectory(partition, systems, w, &ks, Normalization::Cesaro)?;
    let logs = strong_momo_trajectory(partition, systems, w, &ks, Normalization::Logarithmic)?;
    for (c, l) in ces.iter().zip(&logs) {
        traj.push(vec![c.blocks as f64, c.end as f64, c.value, l.value]);
    }

    let mut tele_gap = 0f64;
    for (k, sys) in systems.iter().enumerate() {
        for norm in [Normalization::Cesaro, Normalization::Logarithmic] {
            let (l, r) = telescoping_check(w, sys.as_ref(), starts[k], starts[k + 1], norm)?;
            tele_gap = tele_gap.max((l - r).norm());
        }
        if starts[k + 1] > 100_000 {
            break;
        }
    }

    let mut report = PipelineReport::new("momo", config.echo());
    if let SystemDescriptor::Blocks { inner: InnerKind::Rotation { alpha, m }, .. } = &config.system {
        let grid = rotation_grid(*alpha, *m, config.grid_size);
        report.scalar("uniform_norm", uniform_norm_avg(&grid, w, config.horizon.min(table.n_max()))?);
    }

    // the block orbit is only defined up to its last block
    let wh = config.horizon.min(end.saturating_sub(config.max_h()));
    if wh < 2 {
        return Err(Error::Config(format!("block orbit ends at {end}, too short for the H schedule")));
    }
    let (values, _) = weighted_values(config, table, wh + config.max_h())?;
    let mut summaries = Trajectory::new(&["H", "N", "value"]);
    let mut json = Vec::new();
    for &h in &config.h_schedule {
        let norms = window_norms(&[|n: u64| values[n as usize - 1]], h, wh)?;
        let value = window_stat_from_norms(&norms, config.phi, &[wh])?[0];
        summaries.push(vec![h as f64, wh as f64, value]);
        json.push(StatSummary { stat: "window".into(), h, phi: config.phi, n: wh, value });
    }

    report.scalar("telescoping_max_gap", tele_gap);
    report.scalar("final_cesaro", ces.last().unwrap().value);
    report.scalar("final_logarithmic", logs.last().unwrap().value);
    report.scalar("first_cesaro", ces[0].value);
    report.trajectories.insert("strong".into(), traj);
    report.trajectories.insert("window".into(), summaries);
    report.stats = json;
    Ok(report)
}
