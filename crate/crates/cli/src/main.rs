use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use momo_core::arith::{build_arith_table, ArithTable};
use momo_core::pipelines::{
    average_pipeline, bfree_density_pipeline, erg1_dictionary, erg1_pipeline, momo_pipeline, pnt_pipeline,
    prepare_table, sarnak_density_pipeline, Experiment, ExperimentConfig, PipelineReport,
};

/// Numerical experiments on Möbius orthogonality and density extraction.
#[derive(Parser, Debug)]
#[command(name = "momo-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sieve μ and Λ up to n_max and write the binary table cache.
    Sieve {
        #[arg(long)]
        n_max: Option<u64>,
        /// Cache file; defaults to <out_dir>/arith_<n_max>.bin
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Cesàro and logarithmic averages of w(n) f(T^n x).
    Average(Common),
    /// Strong MOMO trajectories and windowed moments for a block orbit.
    Momo(Common),
    /// Extract a log-density-one set along which the weighted averages vanish.
    Extract(Common),
    /// B-free densities and the set realizing the upper density.
    Bfree {
        /// Comma-separated generators, or "squares" for prime squares.
        #[arg(long)]
        base: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Chowla-type window readings for μ and the Mertens dilation check.
    Pnt(Common),
    /// Simultaneous extraction for a dictionary of observables.
    Erg1(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// key=value configuration file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Precomputed table cache to load instead of sieving.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Any other setting, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<momo_core::Error> for Failure {
    fn from(e: momo_core::Error) -> Self {
        match e {
            momo_core::Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn build_config(
    kind: Experiment,
    common: &Common,
    extra: &[(&str, Option<String>)],
) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_text(kind, &text)?
        }
        None => ExperimentConfig::new(kind),
    };
    let mut flags = vec![
        ("horizon", common.horizon.map(|v| v.to_string())),
        ("system", common.system.clone()),
        ("weights", common.weights.clone()),
        ("phi", common.phi.clone()),
        ("seed", common.seed.map(|v| v.to_string())),
        ("table", common.table.as_ref().map(|p| p.display().to_string())),
        ("out_dir", common.out_dir.as_ref().map(|p| p.display().to_string())),
    ];
    flags.extend(extra.iter().cloned());
    for (k, v) in &flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for kv in &common.overrides {
        let (k, v) =
            kv.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn finish(report: PipelineReport, cfg: &ExperimentConfig) -> Result<ExitCode, Failure> {
    let paths = report.write_to(&cfg.out_dir)?;
    for p in &paths {
        log::info!("wrote {}", p.display());
    }
    println!("{}", report.headline());
    Ok(if report.succeeded() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn sieve(n_max: Option<u64>, out: Option<PathBuf>, common: &Common) -> Result<ExitCode, Failure> {
    let cfg = build_config(Experiment::Sieve, common, &[("horizon", n_max.map(|v| v.to_string()))])?;
    let n = cfg.horizon;
    let table = build_arith_table(n, cfg.block_size)?;
    let path = out.or(cfg.out.clone()).unwrap_or_else(|| cfg.out_dir.join(format!("arith_{n}.bin")));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    table.save(&path)?;
    // read back to catch a truncated or corrupt write
    if ArithTable::load(&path)? != table {
        return Err(Failure::Runtime(format!("reloaded cache at {} differs from the sieve", path.display())));
    }
    println!(
        "sieve n_max={n} mertens={} psi_over_n={:.6} squarefree={} cache={}",
        table.mertens(n)?,
        table.chebyshev_psi(n)? / n as f64,
        table.squarefree_set().len(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Sieve { n_max, out, common } => sieve(n_max, out, &common),
        Command::Average(c) => {
            let cfg = build_config(Experiment::Average, &c, &[])?;
            let table = prepare_table(&cfg, cfg.horizon + cfg.max_h())?;
            finish(average_pipeline(&cfg, &table)?, &cfg)
        }
        Command::Momo(c) => {
            let cfg = build_config(Experiment::Momo, &c, &[])?;
            let end = *cfg.system.build_blocks()?.partition().starts().last().unwrap();
            let table = prepare_table(&cfg, end.max(cfg.horizon) + cfg.max_h())?;
            finish(momo_pipeline(&cfg, &table)?, &cfg)
        }
        Command::Extract(c) => {
            let cfg = build_config(Experiment::Extract, &c, &[])?;
            let table = prepare_table(&cfg, cfg.horizon + cfg.max_h())?;
            finish(sarnak_density_pipeline(&cfg, &table)?, &cfg)
        }
        Command::Bfree { base, common } => {
            let cfg = build_config(Experiment::Bfree, &common, &[("base", base)])?;
            let b = cfg.base.resolve(cfg.horizon)?;
            finish(bfree_density_pipeline(&b, &cfg)?, &cfg)
        }
        Command::Pnt(c) => {
            let cfg = build_config(Experiment::Pnt, &c, &[])?;
            let table = prepare_table(&cfg, cfg.horizon + cfg.max_h())?;
            finish(pnt_pipeline(&table, &cfg)?, &cfg)
        }
        Command::Erg1(c) => {
            let cfg = build_config(Experiment::Erg1, &c, &[])?;
            finish(erg1_pipeline(&erg1_dictionary(&cfg)?, &cfg)?, &cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("momo-lab: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("momo-lab: error: {m}");
            ExitCode::from(1)
        }
    }
}
