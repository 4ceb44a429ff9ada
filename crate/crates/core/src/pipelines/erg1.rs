use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, KappaMode};
use super::report::{PipelineReport, Trajectory};
use super::window::{bound_chain, cesaro_prefix, reported_members, reverify_members, window_extraction};
use crate::averaging::log_avg;
use crate::dynsys::{make_rotation, SharedSystem, SystemDescriptor};
use crate::error::{Error, Result};
use crate::extract::{diagonalize_sets, nest};

/// One dictionary member along the orbit.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub system: SharedSystem,
    /// Surrogate for `∫ f dκ`.
    pub kappa: Complex64,
    /// Frequency `θ` when the observable is `e(θ n + c)`, for the
    /// Dirichlet-kernel comparison.
    pub frequency: Option<f64>,
}

/// `|D_H(θ)|² / H²` with `D_H(θ) = sum_{1<=h<=H} e(hθ)`.
pub fn dirichlet_kernel_sq(theta: f64, h: u64) -> f64 {
    let d: Complex64 = (1..=h).map(|j| Complex64::from_polar(1.0, TAU * (j as f64 * theta).fract())).sum();
    d.norm_sqr() / (h * h) as f64
}

/// Characters `e(k m (x0 + nα))`, `k = 1..=size`, for a rotation descriptor;
/// otherwise the configured system alone.
pub fn erg1_dictionary(config: &ExperimentConfig) -> Result<Vec<Observable>> {
    let len = config.horizon + config.max_h();
    let mut dict = match &config.system {
        SystemDescriptor::Rotation { alpha, x0, m } => (1..=config.dictionary as i64)
            .map(|k| Observable {
                name: format!("char{}", k * m),
                system: make_rotation(*alpha, *x0, k * m),
                kappa: Complex64::new(0.0, 0.0),
                frequency: Some((((k * m) as f64) * alpha).rem_euclid(1.0)),
            })
            .collect(),
        other => vec![Observable {
            name: "f".into(),
            system: other.build(len)?,
            kappa: Complex64::new(0.0, 0.0),
            frequency: None,
        }],
    };
    if config.kappa == KappaMode::Estimate {
        for o in &mut dict {
            o.kappa = log_avg(|n| o.system.eval(n), config.horizon)?;
        }
    }
    Ok(dict)
}

/// Extracts one set per observable from the second-moment window statistic
/// of `f(T^n x) - ∫ f dκ`, then diagonalizes them into a single set along
/// which every empirical average is reported.
pub fn erg1_pipeline(dictionary: &[Observable], config: &ExperimentConfig) -> Result<PipelineReport> {
    config.validate()?;
    if dictionary.is_empty() {
        return Err(Error::Invalid("empty observable dictionary".into()));
    }
    let grid = config.grid()?;
    let len = config.horizon + config.max_h();
    let log_n = (config.horizon as f64).ln();
    let mut report = PipelineReport::new("erg1", config.echo());
    let mut window = Trajectory::new(&["observable", "H", "R", "R_final", "dirichlet"]);
    let mut bounds_all = Trajectory::new(&["observable", "N", "abs_cesaro", "H", "bound", "proof_bound"]);
    let mut sets = Vec::new();
    let mut prefixes = Vec::new();
    let (mut bound_bad, mut reverify_bad) = (0u64, 0u64);
    let mut oracle_gap = 0f64;

    for (j, obs) in dictionary.iter().enumerate() {
        let values: Vec<Complex64> = (1..=len).into_par_iter().map(|n| obs.system.eval(n) - obs.kappa).collect();
        let ex = window_extraction(&values, config.phi, &config.h_schedule, &config.h0_schedule, &grid)?;
        for rep in &ex.reports {
            let fin = *rep.values.last().unwrap();
            let oracle = obs.frequency.map_or(f64::NAN, |t| dirichlet_kernel_sq(t, rep.h));
            if !oracle.is_nan() {
                oracle_gap = oracle_gap.max((fin - oracle).abs());
            }
            window.push(vec![j as f64, rep.h as f64, rep.limsup, fin, oracle]);
        }
        let prefix = cesaro_prefix(&values, config.horizon);
        let members = reported_members(&ex.assembled.set, &grid);
        let sup_v = obs.system.bound() + obs.kappa.norm();
        let (b, bad) = bound_chain(&ex, &prefix, sup_v, &members);
        bound_bad += bad;
        for row in b.rows {
            let mut r = vec![j as f64];
            r.extend(row);
            bounds_all.push(r);
        }
        reverify_bad += reverify_members(&ex, &values, config.seed.wrapping_add(j as u64));
        if let Some(f) = &ex.assembled.failure {
            report.fail(&format!("extract:{}", obs.name), format!("stage {}: {}", f.stage, f.reason));
        }
        report.certificates.insert(format!("A_{}", obs.name), ex.assembled.clone());
        sets.push(ex.assembled.set);
        prefixes.push(prefix);
    }

    let common = diagonalize_sets(&sets, &grid)?;
    if let Some(f) = &common.failure {
        report.fail("diagonalize", format!("stage {}: {}", f.stage, f.reason));
    }
    let switch: Vec<u64> = serde_json::from_value(common.witnesses["switch_points"].clone()).unwrap_or_default();
    let nested = nest(&sets);
    let containment_bad =
        switch.iter().enumerate().filter(|&(k, &n)| !common.set.is_subset_on(&nested[k], n, config.horizon)).count();

    let mut convergence = Trajectory::new(&["observable", "N", "abs_deviation"]);
    let mut last_dev = 0f64;
    let largest = common.set.max_element();
    for n in reported_members(&common.set, &grid) {
        for (j, p) in prefixes.iter().enumerate() {
            let d = p[n as usize].norm();
            if Some(n) == largest {
                last_dev = last_dev.max(d);
            }
            convergence.push(vec![j as f64, n as f64, d]);
        }
    }
    let mut density = Trajectory::new(&["N", "log_density"]);
    for (n, r) in common.checkpoints.iter().zip(&common.readings) {
        density.push(vec![*n as f64, *r]);
    }

    report.scalar("final_reading", common.final_reading());
    report.scalar("dictionary_size", dictionary.len() as f64);
    report.scalar("dirichlet_max_gap", oracle_gap);
    report.scalar("dirichlet_tolerance", 2.0 / log_n);
    report.scalar("bound_violations", bound_bad as f64);
    report.scalar("reverify_violations", reverify_bad as f64);
    report.scalar("containment_violations", containment_bad as f64);
    report.scalar("max_final_deviation", last_dev);
    for (j, o) in dictionary.iter().enumerate() {
        report.scalar(&format!("kappa_re_{j}"), o.kappa.re);
        report.scalar(&format!("kappa_im_{j}"), o.kappa.im);
    }
    if bound_bad > 0 {
        report.fail("bound_chain", format!("{bound_bad} reported members exceed the bound"));
    }
    if reverify_bad + containment_bad as u64 > 0 {
        report.fail("reverify", "membership or containment violated");
    }
    report.trajectories.insert("bounds".into(), bounds_all);
    report.trajectories.insert("convergence".into(), convergence);
    report.trajectories.insert("density".into(), density);
    report.trajectories.insert("window".into(), window);
    report.certificates.insert("N".into(), common);
    Ok(report)
}
