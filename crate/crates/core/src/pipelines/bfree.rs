use super::config::ExperimentConfig;
use super::report::{PipelineReport, Trajectory};
use super::window::{reported_members, REVERIFY_SAMPLES};
use crate::arith::{bfree_set, MultipleBase};
use crate::averaging::log_density_readings;
use crate::error::Result;
use crate::extract::{davenport_erdos_set, level_set};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Builds `F_B`, extracts the set along which its Cesàro density approaches
/// the upper density, and reports both densities.
pub fn bfree_density_pipeline(base: &MultipleBase, config: &ExperimentConfig) -> Result<PipelineReport> {
    config.validate()?;
    let grid = config.grid()?;
    let horizon = config.horizon;
    let mut report = PipelineReport::new("bfree", config.echo());
    let fb = bfree_set(base, horizon);
    let a = |n: u64| if fb.contains(n) { 1.0 } else { 0.0 };
    let cert = davenport_erdos_set(a, &config.eps_schedule, &grid)?;
    let ell = cert.witnesses["ell"].as_f64().unwrap_or(f64::NAN);
    let switch: Vec<u64> = serde_json::from_value(cert.witnesses["switch_points"].clone()).unwrap_or_default();

    let mut densities = Trajectory::new(&["N", "cesaro", "log_density", "along_b"]);
    let logs = log_density_readings(&fb, grid.points())?;
    for (&n, &l) in grid.points().iter().zip(&logs) {
        let c = fb.count_up_to(n) as f64 / n as f64;
        densities.push(vec![n as f64, c, l, if cert.set.contains(n) { 1.0 } else { 0.0 }]);
    }
    let mut along = Trajectory::new(&["N", "cesaro"]);
    for n in reported_members(&cert.set, &grid) {
        along.push(vec![n as f64, fb.count_up_to(n) as f64 / n as f64]);
    }

    // independent pass: each sampled member of B lies in its B_eps
    let levels: Vec<_> = config.eps_schedule[..switch.len()].iter().map(|&e| level_set(a, ell - e, horizon)).collect();
    let members: Vec<u64> = cert.set.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let reverify = members
        .choose_multiple(&mut rng, REVERIFY_SAMPLES)
        .filter(|&&n| {
            let piece = switch.iter().skip(1).filter(|&&p| p <= n).count();
            !levels[piece].contains(n)
        })
        .count();
    // block agreement on [N_k, N_{k+1})
    let agreement = (0..switch.len())
        .filter(|&k| {
            let hi = switch.get(k + 1).map_or(horizon, |&p| p - 1);
            !cert.set.agrees_on(&levels[k], switch[k], hi)
        })
        .count();

    report.scalar("ell", ell);
    report.scalar("delta_reading", *logs.last().unwrap());
    report.scalar("cesaro_at_horizon", fb.count_up_to(horizon) as f64 / horizon as f64);
    report.scalar("cesaro_along_b", along.rows.last().map_or(f64::NAN, |r| r[1]));
    report.scalar("b_reading", cert.final_reading());
    report.scalar("generators", base.generators().len() as f64);
    report.scalar("reverify_violations", reverify as f64);
    report.scalar("agreement_violations", agreement as f64);
    if let Some(f) = &cert.failure {
        report.fail("davenport_erdos", format!("stage {}: {}", f.stage, f.reason));
    }
    if reverify + agreement > 0 {
        report.fail("reverify", "membership or block agreement violated");
    }
    report.trajectories.insert("along_b".into(), along);
    report.trajectories.insert("densities".into(), densities);
    report.certificates.insert("B".into(), cert);
    Ok(report)
}
