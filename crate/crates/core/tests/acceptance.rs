//! Acceptance suite. Runs every criterion at full scale and prints one
//! PASS/FAIL line each; exits non-zero if any criterion fails.
//!
//! cargo test -p momo-core --test verify_acceptance

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use momo_core::arith::{bfree_set, build_arith_table, ArithTable, MultipleBase, SieveConfig};
use momo_core::averaging::{log_density_readings, natural_density_at, summation_by_parts, CheckpointGrid};
use momo_core::dynsys::{make_rotation, rotation_grid, BlockPartition, SharedSystem, GOLDEN_CONJUGATE};
use momo_core::extract::{
    cesaro_threshold_set, davenport_erdos_set, diagonalize_sets, level_set, markov_set, membership_violations, nest,
    DensityCertificate,
};
use momo_core::momo::{
    chowla2_window, strong_momo_stat, telescoping_check, uniform_norm_avg, window_stat, Normalization, Phi,
};
use momo_core::pipelines::{
    average_pipeline, bfree_density_pipeline, dirichlet_kernel_sq, erg1_dictionary, erg1_pipeline, momo_pipeline,
    pnt_pipeline, prepare_table, sarnak_density_pipeline, Experiment, ExperimentConfig, PipelineReport,
};
use momo_core::set::IndexSet;
use momo_core::sum::NeumaierSum;
use momo_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MILLION: u64 = 1_000_000;
const TEN_MILLION: u64 = 10_000_000;
const SIX_OVER_PI2: f64 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Shared tables: 10^7 for density checks, 10^6 + 64 for the pipelines.
struct Tables {
    big: ArithTable,
    small: ArithTable,
}

fn c1_sieve(_: &Tables) -> Outcome {
    let t = build_arith_table(100_000, 4096).unwrap();
    let mut mu_bad = 0;
    let mut lambda_bad = 0;
    for n in 1..=100_000 {
        mu_bad += (t.mu(n) != common::mobius(n)) as u32;
        lambda_bad += (t.lambda(n).to_bits() != common::mangoldt(n).to_bits()) as u32;
    }
    let start = Instant::now();
    let big = build_arith_table_with_default(TEN_MILLION);
    let secs = start.elapsed().as_secs_f64();
    let ok = mu_bad == 0 && lambda_bad == 0 && secs < 10.0 && big.n_max() == TEN_MILLION;
    outcome(ok, format!("mu mismatches {mu_bad}, Lambda mismatches {lambda_bad}, 10^7 build {secs:.2}s"))
}

fn build_arith_table_with_default(n: u64) -> ArithTable {
    momo_core::arith::build_arith_table_with(n, &SieveConfig::default()).unwrap()
}

fn c2_summation_by_parts(t: &Tables) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0f64;
    for _ in 0..100 {
        let seq: Vec<Complex64> = (0..10_000)
            .map(|_| Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU))
            .collect();
        let (l, r) = summation_by_parts(|n| seq[n as usize - 1], 10_000);
        worst = worst.max((l - r).norm());
    }
    let (l, r) = summation_by_parts(|n| Complex64::new(t.small.mu(n) as f64, 0.0), MILLION);
    let mu_gap = (l - r).norm();
    outcome(worst <= 1e-9 && mu_gap <= 1e-9, format!("random max gap {worst:.2e}, mu gap at 10^6 {mu_gap:.2e}"))
}

fn c3_mertens(t: &Tables) -> Outcome {
    let m6 = t.small.mertens(MILLION).unwrap();
    let direct: i64 = (1..=10_000).map(|n| common::mobius(n) as i64).sum();
    let m4 = t.small.mertens(10_000).unwrap();
    let ratio = m6.abs() as f64 / MILLION as f64;
    outcome(ratio <= 1e-3 && m4 == direct, format!("|M(10^6)|/10^6 = {ratio:.2e}, M(10^4) = {m4} vs oracle {direct}"))
}

fn c4_squarefree_density(t: &Tables) -> Outcome {
    let sq = bfree_set(&MultipleBase::prime_squares(TEN_MILLION), TEN_MILLION);
    let same = sq == *t.big.squarefree_set();
    let cesaro = natural_density_at(&sq, TEN_MILLION).unwrap();
    let log = log_density_readings(&sq, &[TEN_MILLION]).unwrap()[0];
    let ok = same && (cesaro - SIX_OVER_PI2).abs() <= 5e-3 && (log - SIX_OVER_PI2).abs() <= 1e-2;
    outcome(
        ok,
        format!(
            "Cesaro {cesaro:.6} (gap {:.2e} <= 5e-3), log reading {log:.6} (gap {:.2e} <= 1e-2), sieve agreement {same}",
            (cesaro - SIX_OVER_PI2).abs(),
            (log - SIX_OVER_PI2).abs()
        ),
    )
}

/// Uniform draws mapped through `u^q`, `q` chosen so the mean is `0.95 gamma`.
fn synthetic_g(gamma: f64, len: u64, seed: u64) -> Vec<f64> {
    let q = 1.0 / (0.95 * gamma) - 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen::<f64>().powf(q)).collect()
}

fn c5_markov_cesaro(_: &Tables) -> Outcome {
    let grid = CheckpointGrid::geometric(1000, MILLION, 4).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, gamma) in [0.01, 0.04, 0.09].into_iter().enumerate() {
        let g = synthetic_g(gamma, MILLION, 50 + i as u64);
        let at = |n: u64| g[n as usize - 1];
        let log_avg: f64 =
            (1..=MILLION).map(|n| at(n) / n as f64).collect::<NeumaierSum>().value() / (MILLION as f64).ln();
        let floor = 1.0 - gamma.sqrt() - 0.02;

        let m = markov_set(at, gamma, &grid).unwrap();
        let m_bad = membership_violations(&m.set, |n| at(n) < gamma.sqrt());
        let t = cesaro_threshold_set(at, gamma, &grid).unwrap();
        // independent pass: plain running sums, no compensation
        let mut s = 0.0;
        let means: Vec<f64> = (1..=MILLION)
            .map(|n| {
                s += at(n);
                s / n as f64
            })
            .collect();
        let t_bad = membership_violations(&t.set, |n| means[n as usize - 1] <= gamma.sqrt());
        let pass =
            log_avg <= gamma && m.final_reading() >= floor && t.final_reading() >= floor && m_bad == 0 && t_bad == 0;
        ok &= pass;
        parts.push(format!(
            "gamma={gamma}: G log-avg {log_avg:.4}, readings {:.4}/{:.4} >= {floor:.4}, violations {m_bad}/{t_bad}",
            m.final_reading(),
            t.final_reading()
        ));
    }
    outcome(ok, parts.join("; "))
}

fn switch_points(c: &DensityCertificate) -> Vec<u64> {
    serde_json::from_value(c.witnesses["switch_points"].clone()).unwrap()
}

fn containment_failures(c: &DensityCertificate, family: &[IndexSet]) -> usize {
    let nested = nest(family);
    let h = c.set.horizon();
    switch_points(c).iter().enumerate().filter(|&(k, &n)| !c.set.is_subset_on(&nested[k], n, h)).count()
}

fn agreement_failures<A: Fn(u64) -> f64 + Copy>(c: &DensityCertificate, a: A, eps: &[f64]) -> usize {
    let h = c.set.horizon();
    let ell = c.witnesses["ell"].as_f64().unwrap();
    let sw = switch_points(c);
    (0..sw.len())
        .filter(|&k| {
            let b = level_set(a, ell - eps[k], h);
            let hi = sw.get(k + 1).map_or(h, |&p| p - 1);
            !c.set.agrees_on(&b, sw[k], hi)
        })
        .count()
}

fn c6_diagonalization(t: &Tables) -> Outcome {
    let h = MILLION;
    let grid = CheckpointGrid::geometric(1000, h, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let random: Vec<IndexSet> = (1..=6u64)
        .map(|k| IndexSet::from_predicate(h, |_| rng.gen::<f64>() >= 1.0 / ((k + 10) * (k + 10)) as f64))
        .collect();
    let families: Vec<(&str, Vec<IndexSet>)> = vec![
        ("tails", (1..=6).map(|k| IndexSet::from_predicate(h, |n| n > k)).collect()),
        (
            "coprime",
            [101u64, 103, 107, 109, 113, 127].iter().map(|&p| IndexSet::from_predicate(h, |n| n % p != 0)).collect(),
        ),
        ("random", random),
    ];
    let mut bad = 0;
    let mut parts = Vec::new();
    for (name, fam) in &families {
        let c = diagonalize_sets(fam, &grid).unwrap();
        let f = containment_failures(&c, fam);
        bad += f + c.failure.is_some() as usize;
        let stage = c.failure.as_ref().map_or("none".to_string(), |e| e.stage.to_string());
        parts.push(format!("{name} containment failures {f} (failed stage {stage})"));
    }
    let eps = [0.1, 0.05, 0.02, 0.01];
    let odd = |n: u64| (n % 2) as f64;
    let ones = |_: u64| 1.0;
    let mut bern = ChaCha8Rng::seed_from_u64(66);
    let coin: Vec<f64> = (0..h).map(|_| if bern.gen::<f64>() < 0.3 { 1.0 } else { 0.0 }).collect();
    let coin_at = |n: u64| coin[n as usize - 1];
    let c_odd = davenport_erdos_set(odd, &eps, &grid).unwrap();
    let c_one = davenport_erdos_set(ones, &eps, &grid).unwrap();
    let c_coin = davenport_erdos_set(coin_at, &[0.1, 0.05], &grid).unwrap();
    let de_bad = agreement_failures(&c_odd, odd, &eps)
        + agreement_failures(&c_one, ones, &eps)
        + agreement_failures(&c_coin, coin_at, &[0.1, 0.05]);
    bad += de_bad;
    parts.push(format!("Davenport-Erdos agreement failures {de_bad}"));

    let mut cfg = ExperimentConfig::new(Experiment::Bfree);
    cfg.horizon = MILLION;
    let sq = bfree_density_pipeline(&MultipleBase::prime_squares(MILLION), &cfg).unwrap();
    let sq_cert = &sq.certificates["B"];
    let sqfree = t.small.squarefree_set().with_horizon(MILLION);
    let ind = |n: u64| if sqfree.contains(n) { 1.0 } else { 0.0 };
    let sq_bad = agreement_failures(sq_cert, ind, &cfg.eps_schedule) + sq.summary["agreement_violations"] as usize;
    bad += sq_bad;
    parts.push(format!("square-free pipeline agreement failures {sq_bad}"));
    outcome(bad == 0, parts.join(", "))
}

fn c7_window_decay(t: &Tables) -> Outcome {
    let mu = |n: u64| Complex64::new(t.small.mu(n) as f64, 0.0);
    let r4 = chowla2_window(mu, 4, MILLION).unwrap();
    let r64 = chowla2_window(mu, 64, MILLION).unwrap();
    let alpha = GOLDEN_CONJUGATE;
    let rot = make_rotation(alpha, 0.0, 1);
    let v = |n: u64| rot.eval(n);
    let w = window_stat(v, 64, Phi::Square, MILLION).unwrap();
    let oracle = dirichlet_kernel_sq(alpha, 64);
    let tol = 2.0 / (MILLION as f64).ln();
    let ok = r64 < r4 && (w - oracle).abs() <= tol;
    outcome(ok, format!("chowla2 H=4 {r4:.5} > H=64 {r64:.5}; rotation {w:.6} vs Dirichlet {oracle:.6} (tol {tol:.4})"))
}

fn c8_rotation_grid(t: &Tables) -> Outcome {
    let family = rotation_grid(GOLDEN_CONJUGATE, 1, 64);
    let u = uniform_norm_avg(&family, |n| t.small.mu(n) as f64, MILLION).unwrap();
    outcome(u <= 0.05, format!("max over 64 phases {u:.3e} <= 0.05"))
}

fn c9_strong_momo(t: &Tables) -> Outcome {
    let p = BlockPartition::squares(999);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let systems: Vec<SharedSystem> = (0..999).map(|_| make_rotation(GOLDEN_CONJUGATE, rng.gen(), 1)).collect();
    let mu = |n: u64| t.small.mu(n) as f64;
    let small = strong_momo_stat(&p, &systems, mu, 99, Normalization::Cesaro).unwrap();
    let large = strong_momo_stat(&p, &systems, mu, 999, Normalization::Cesaro).unwrap();
    let mut worst = 0f64;
    let mut pairs = 0;
    let starts = p.starts();
    let mut tested: Vec<usize> = (0..300).collect();
    tested.extend((300..999).step_by(37));
    for &k in &tested {
        for norm in [Normalization::Cesaro, Normalization::Logarithmic] {
            let (l, r) = telescoping_check(mu, systems[k].as_ref(), starts[k], starts[k + 1], norm).unwrap();
            worst = worst.max((l - r).norm());
            pairs += 1;
        }
    }
    let (l, r) = telescoping_check(mu, systems[0].as_ref(), 100, 1000, Normalization::Cesaro).unwrap();
    worst = worst.max((l - r).norm());
    let ok = large.value < small.value && worst <= 1e-9;
    outcome(
        ok,
        format!(
            "b={} -> {:.5}, b={} -> {:.5}; telescoping max gap {worst:.2e} over {pairs} pairs",
            small.end, small.value, large.end, large.value
        ),
    )
}

fn c10_sarnak(t: &Tables) -> Outcome {
    let mut cfg = ExperimentConfig::new(Experiment::Extract);
    cfg.horizon = MILLION;
    let r = sarnak_density_pipeline(&cfg, &t.small).unwrap();
    let reading = r.summary["final_reading"];
    let bounds = &r.trajectories["bounds"];
    let ok = reading >= 0.9
        && r.summary["bound_violations"] == 0.0
        && r.summary["reverify_violations"] == 0.0
        && r.succeeded();
    outcome(
        ok,
        format!(
            "A reading {reading:.4} >= 0.9; bound chain checked at {} members, {} violations; reverify {}",
            bounds.rows.len(),
            r.summary["bound_violations"],
            r.summary["reverify_violations"]
        ),
    )
}

fn c11_pnt(t: &Tables) -> Outcome {
    let psi = t.small.chebyshev_psi(MILLION).unwrap();
    let oracle = common::psi_from_primes(MILLION);
    let ratio = psi / MILLION as f64;
    let mut cfg = ExperimentConfig::new(Experiment::Pnt);
    cfg.horizon = MILLION;
    let r = pnt_pipeline(&t.small, &cfg).unwrap();
    let s = &r.summary;
    let psi_top = &r.trajectories["psi"];
    let in_band = psi_top.column("psi_over_x").unwrap().iter().all(|v| (0.98..=1.02).contains(v));
    let x = s.get("dilate_x").copied();
    let ok = (0.99..=1.01).contains(&ratio)
        && (psi - oracle).abs() <= 1e-6 * psi
        && s["tilde_reading"] >= 0.9
        && psi_top.rows.len() == 10
        && in_band
        && x.is_some_and(|x| x <= MILLION as f64)
        && s["dilate_rescan_violations"] == 0.0
        && s["containment_violations"] == 0.0;
    outcome(
        ok,
        format!(
            "psi(10^6)/10^6 = {ratio:.6} (prime oracle {:.6}); A~ reading {:.4}; top-10 psi(x)/x in band {in_band}; X = {x:?}; rescan violations {}; stage flag {:?}",
            oracle / MILLION as f64,
            s["tilde_reading"],
            s["dilate_rescan_violations"],
            r.failure.as_ref().map(|f| f.stage.clone())
        ),
    )
}

fn run_twice<F: Fn(&ExperimentConfig) -> PipelineReport>(kind: Experiment, text: &str, f: F) -> bool {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("experiment.cfg");
    fs::write(&cfg_path, text).unwrap();
    let outputs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|i| {
            let cfg = ExperimentConfig::from_text(kind, &fs::read_to_string(&cfg_path).unwrap()).unwrap();
            let out = dir.path().join(format!("run{i}"));
            let paths = f(&cfg).write_to(&out).unwrap();
            paths
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
                .collect()
        })
        .collect();
    outputs[0] == outputs[1] && !outputs[0].is_empty()
}

fn c12_determinism(_: &Tables) -> Outcome {
    let base = "horizon=100000\nseed=12\n";
    let table = |cfg: &ExperimentConfig| prepare_table(cfg, cfg.horizon + cfg.max_h()).unwrap();
    let checks: Vec<(&str, bool)> = vec![
        ("extract", run_twice(Experiment::Extract, base, |c| sarnak_density_pipeline(c, &table(c)).unwrap())),
        ("pnt", run_twice(Experiment::Pnt, base, |c| pnt_pipeline(&table(c), c).unwrap())),
        (
            "bfree",
            run_twice(Experiment::Bfree, &format!("{base}base=squares\n"), |c| {
                bfree_density_pipeline(&c.base.resolve(c.horizon).unwrap(), c).unwrap()
            }),
        ),
        ("erg1", run_twice(Experiment::Erg1, base, |c| erg1_pipeline(&erg1_dictionary(c).unwrap(), c).unwrap())),
        ("average", run_twice(Experiment::Average, base, |c| average_pipeline(c, &table(c)).unwrap())),
        (
            "momo",
            run_twice(
                Experiment::Momo,
                "horizon=100000\nsystem=blocks:inner=rotation;alpha=golden;m=1;spacing=squares;count=300;seed=3\n",
                |c| momo_pipeline(c, &table(c)).unwrap(),
            ),
        ),
    ];
    let ok = checks.iter().all(|c| c.1);
    let detail =
        checks.iter().map(|(n, b)| format!("{n}={}", if *b { "identical" } else { "DIFFERS" })).collect::<Vec<_>>();
    outcome(ok, detail.join(", "))
}

type Check = fn(&Tables) -> Outcome;

fn main() -> ExitCode {
    let start = Instant::now();
    let tables = Tables {
        big: build_arith_table_with_default(TEN_MILLION),
        small: build_arith_table(MILLION + 64, 1 << 16).unwrap(),
    };
    let criteria: [(&str, Check); 12] = [
        ("sieve exactness and speed", c1_sieve),
        ("summation by parts", c2_summation_by_parts),
        ("Mertens smallness", c3_mertens),
        ("square-free density", c4_squarefree_density),
        ("Markov / Cesaro threshold guarantees", c5_markov_cesaro),
        ("diagonalization exactness", c6_diagonalization),
        ("window-statistic decay", c7_window_decay),
        ("rotation orthogonality on a grid", c8_rotation_grid),
        ("strong MOMO trend", c9_strong_momo),
        ("full extraction pipeline", c10_sarnak),
        ("PNT bridge", c11_pnt),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check(&tables);
        failed += !o.pass as u32;
        println!(
            "criterion {:>2} {:<40} {} [{:.1}s] {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("{} of 12 criteria passed in {:.1}s", 12 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
