//! Pipelines at small horizons, checked against direct computations.

mod common;

use std::sync::Arc;

use momo_core::arith::build_arith_table;
use momo_core::dynsys::{make_rotation, Constant, SharedSystem, GOLDEN_CONJUGATE};
use momo_core::extract::DensityCertificate;
use momo_core::pipelines::{
    average_pipeline, bfree_density_pipeline, erg1_dictionary, erg1_pipeline, momo_pipeline, pnt_from_set,
    pnt_pipeline, sarnak_density_pipeline, Experiment, ExperimentConfig, Observable, PipelineReport,
};
use momo_core::set::IndexSet;
use momo_core::sum::harmonic;
use momo_core::Complex64;

fn config(kind: Experiment, horizon: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.horizon = horizon;
    c
}

#[test]
fn average_matches_direct_sums() {
    let cfg = config(Experiment::Average, 20_000);
    let table = build_arith_table(20_100, 1024).unwrap();
    let r = average_pipeline(&cfg, &table).unwrap();
    let rot = make_rotation(GOLDEN_CONJUGATE, 0.0, 1);
    let direct: Complex64 = (1..=20_000).map(|n| rot.eval(n) * common::mobius(n) as f64).sum::<Complex64>() / 20_000.0;
    assert!((r.summary["abs_cesaro"] - direct.norm()).abs() < 1e-12);
    assert!(r.summary["sbp_gap"] < 1e-9);
    let t = &r.trajectories["averages"];
    assert_eq!(t.rows.last().unwrap()[0], 20_000.0);
}

#[test]
fn sarnak_pipeline_small_horizon() {
    let cfg = config(Experiment::Extract, 50_000);
    let table = build_arith_table(50_000 + cfg.max_h(), 4096).unwrap();
    let r = sarnak_density_pipeline(&cfg, &table).unwrap();
    assert_eq!(r.summary["bound_violations"], 0.0);
    assert_eq!(r.summary["reverify_violations"], 0.0);
    let a = &r.certificates["A"];
    assert_eq!(a.set.horizon(), 50_000);
    assert!(r.summary["final_reading"] > 0.5);
    // every bound row respects the chain
    let bounds = &r.trajectories["bounds"];
    let abs = bounds.column("abs_cesaro").unwrap();
    let b = bounds.column("bound").unwrap();
    assert!(abs.iter().zip(&b).all(|(x, y)| x <= &(y + 1e-12)));
}

#[test]
fn sarnak_pipeline_needs_table_past_horizon() {
    let cfg = config(Experiment::Extract, 10_000);
    let table = build_arith_table(10_000, 1024).unwrap();
    assert!(sarnak_density_pipeline(&cfg, &table).is_err());
}

#[test]
fn bfree_primes_squares_density() {
    let cfg = config(Experiment::Bfree, 100_000);
    let base = cfg.base.resolve(cfg.horizon).unwrap();
    let r = bfree_density_pipeline(&base, &cfg).unwrap();
    assert!(r.succeeded(), "{}", r.headline());
    let count = (1..=100_000u64).filter(|&n| common::mobius(n) != 0).count() as f64;
    assert!((r.summary["cesaro_at_horizon"] - count / 1e5).abs() < 1e-15);
    assert!(r.summary["ell"] >= r.summary["cesaro_at_horizon"]);
    assert_eq!(r.summary["agreement_violations"], 0.0);
}

#[test]
fn bfree_finite_base() {
    let mut cfg = config(Experiment::Bfree, 30_000);
    cfg.set("base", "6,10,15").unwrap();
    let base = cfg.base.resolve(cfg.horizon).unwrap();
    let r = bfree_density_pipeline(&base, &cfg).unwrap();
    let direct = (1..=30_000u64).filter(|n| n % 6 != 0 && n % 10 != 0 && n % 15 != 0).count() as f64 / 30_000.0;
    assert!((r.summary["cesaro_at_horizon"] - direct).abs() < 1e-15);
    assert_eq!(r.summary["generators"], 3.0);
}

#[test]
fn erg1_constant_observable_reading() {
    // a constant c with κ = 0: every window average has modulus |c|, so the
    // reading at N is φ(|c|) H_N / log N exactly
    let mut cfg = config(Experiment::Erg1, 20_000);
    cfg.set("phi", "identity").unwrap();
    cfg.set("h_schedule", "1,4,16").unwrap();
    let c = Complex64::new(0.3, 0.4);
    let dict = vec![Observable {
        name: "const".into(),
        system: Arc::new(Constant(c)) as SharedSystem,
        kappa: Complex64::new(0.0, 0.0),
        frequency: None,
    }];
    let r = erg1_pipeline(&dict, &cfg).unwrap();
    let expected = c.norm() * harmonic(20_000) / (20_000f64).ln();
    let finals = r.trajectories["window"].column("R_final").unwrap();
    assert_eq!(finals.len(), 3);
    for f in finals {
        assert!((f - expected).abs() < 1e-6, "{f} vs {expected}");
    }
}

#[test]
fn erg1_kappa_shift_is_invisible() {
    // adding a constant c to the observable and subtracting c as κ leaves
    // every statistic unchanged
    let cfg = config(Experiment::Erg1, 20_000);
    let c = Complex64::new(0.25, -0.5);
    let base = make_rotation(GOLDEN_CONJUGATE, 0.1, 1);
    let shifted: SharedSystem = Arc::new(Shifted { inner: base.clone(), c });
    let plain = vec![Observable { name: "f".into(), system: base, kappa: Complex64::new(0.0, 0.0), frequency: None }];
    let moved = vec![Observable { name: "f".into(), system: shifted, kappa: c, frequency: None }];
    let a = erg1_pipeline(&plain, &cfg).unwrap();
    let b = erg1_pipeline(&moved, &cfg).unwrap();
    let ra = a.trajectories["window"].column("R").unwrap();
    let rb = b.trajectories["window"].column("R").unwrap();
    for (x, y) in ra.iter().zip(&rb) {
        assert!((x - y).abs() < 1e-9);
    }
    assert_eq!(a.certificates["N"].set, b.certificates["N"].set);
}

#[derive(Debug)]
struct Shifted {
    inner: SharedSystem,
    c: Complex64,
}

impl momo_core::dynsys::ObservableSystem for Shifted {
    fn eval(&self, n: u64) -> Complex64 {
        self.inner.eval(n) + self.c
    }

    fn bound(&self) -> f64 {
        self.inner.bound() + self.c.norm()
    }
}

#[test]
fn erg1_rotation_dictionary_tracks_dirichlet() {
    let cfg = config(Experiment::Erg1, 50_000);
    let dict = erg1_dictionary(&cfg).unwrap();
    assert_eq!(dict.len(), cfg.dictionary);
    let r = erg1_pipeline(&dict, &cfg).unwrap();
    assert!(r.summary["dirichlet_max_gap"] <= r.summary["dirichlet_tolerance"]);
    assert_eq!(r.summary["containment_violations"], 0.0);
    assert_eq!(r.summary["bound_violations"], 0.0);
}

#[test]
fn pnt_with_all_integers_injected() {
    let cfg = config(Experiment::Pnt, 100_000);
    let table = build_arith_table(100_000 + cfg.max_h(), 4096).unwrap();
    let grid = cfg.grid().unwrap();
    let a = DensityCertificate::new(IndexSet::full(100_000), &grid).unwrap();
    let mut report = PipelineReport::new("pnt", cfg.echo());
    pnt_from_set(&table, a, &cfg, &mut report).unwrap();
    // with A = ℕ every dilation stays inside A
    assert_eq!(report.summary["containment_violations"], 0.0);
    assert_eq!(report.certificates["A_tilde"].set, IndexSet::full(100_000));
    let psi = common::psi_from_primes(100_000) / 1e5;
    assert!((report.summary["psi_horizon"] - psi).abs() < 1e-9);
}

#[test]
fn pnt_pipeline_small_horizon() {
    let cfg = config(Experiment::Pnt, 100_000);
    let table = build_arith_table(100_000 + cfg.max_h(), 4096).unwrap();
    let r = pnt_pipeline(&table, &cfg).unwrap();
    assert_eq!(r.summary["dilate_rescan_violations"], 0.0);
    assert_eq!(r.trajectories["psi"].rows.len(), 10);
    assert!(r.summary["abs_mertens_over_n"] < 0.01);
    let short = build_arith_table(100_000, 4096).unwrap();
    assert!(pnt_pipeline(&short, &cfg).is_err());
}

#[test]
fn momo_pipeline_block_rotation() {
    let mut cfg = config(Experiment::Momo, 50_000);
    cfg.set("system", "blocks:inner=rotation;alpha=golden;m=1;spacing=squares;count=240;seed=5").unwrap();
    let table = build_arith_table(60_000, 4096).unwrap();
    let r = momo_pipeline(&cfg, &table).unwrap();
    assert!(r.summary["telescoping_max_gap"] < 1e-9);
    assert!(r.summary["final_cesaro"] <= 1.0);
    assert_eq!(r.stats.len(), cfg.h_schedule.len());
    let json = serde_json::to_value(&r.stats[0]).unwrap();
    for key in ["stat", "H", "phi", "N", "value"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn report_files_land_in_out_dir() {
    let cfg = config(Experiment::Bfree, 5_000);
    let base = cfg.base.resolve(cfg.horizon).unwrap();
    let r = bfree_density_pipeline(&base, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = r.write_to(dir.path()).unwrap();
    assert!(paths.iter().any(|p| p.ends_with("bfree_report.json")));
    let csv = std::fs::read_to_string(dir.path().join("bfree_densities.csv")).unwrap();
    assert!(csv.starts_with("# momo-lab bfree/densities v1\n"));
    let back: PipelineReport =
        serde_json::from_slice(&std::fs::read(dir.path().join("bfree_report.json")).unwrap()).unwrap();
    assert_eq!(back.certificates["B"].set, r.certificates["B"].set);
}
