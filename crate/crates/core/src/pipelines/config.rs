//! Flat `key=value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::arith::ArithTable;
use crate::averaging::CheckpointGrid;
use crate::dynsys::{BaseSpec, SystemDescriptor};
use crate::error::{Error, Result};
use crate::momo::Phi;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Sieve,
    Average,
    Momo,
    Extract,
    Bfree,
    Pnt,
    Erg1,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Sieve,
        Experiment::Average,
        Experiment::Momo,
        Experiment::Extract,
        Experiment::Bfree,
        Experiment::Pnt,
        Experiment::Erg1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sieve => "sieve",
            Experiment::Average => "average",
            Experiment::Momo => "momo",
            Experiment::Extract => "extract",
            Experiment::Bfree => "bfree",
            Experiment::Pnt => "pnt",
            Experiment::Erg1 => "erg1",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Arithmetic weights multiplying the observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightsSpec {
    Mobius,
    Zero,
    One,
}

impl WeightsSpec {
    pub fn weight(self, table: &ArithTable, n: u64) -> f64 {
        match self {
            WeightsSpec::Mobius => table.mu(n) as f64,
            WeightsSpec::Zero => 0.0,
            WeightsSpec::One => 1.0,
        }
    }
}

impl FromStr for WeightsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "mu" | "mobius" => Ok(WeightsSpec::Mobius),
            "zero" => Ok(WeightsSpec::Zero),
            "one" => Ok(WeightsSpec::One),
            other => Err(Error::Config(format!("unknown weights '{other}'"))),
        }
    }
}

impl fmt::Display for WeightsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightsSpec::Mobius => "mu",
            WeightsSpec::Zero => "zero",
            WeightsSpec::One => "one",
        })
    }
}

/// How `∫ f dκ` is supplied to the empirical-measure pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaMode {
    /// 0 for every dictionary member (nonzero rotation characters).
    Zero,
    /// Logarithmic average of the observable at the horizon.
    Estimate,
}

impl FromStr for KappaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(KappaMode::Zero),
            "estimate" => Ok(KappaMode::Estimate),
            other => Err(Error::Config(format!("unknown kappa mode '{other}'"))),
        }
    }
}

impl fmt::Display for KappaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KappaMode::Zero => "zero",
            KappaMode::Estimate => "estimate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub system: SystemDescriptor,
    pub weights: WeightsSpec,
    pub horizon: u64,
    pub checkpoints: Option<Vec<u64>>,
    pub checkpoint_start: u64,
    pub per_decade: u32,
    pub h_schedule: Vec<u64>,
    pub h0_schedule: Vec<u64>,
    pub eps_schedule: Vec<f64>,
    pub phi: Phi,
    pub grid_size: usize,
    pub seed: u64,
    pub base: BaseSpec,
    pub dilate_a: u64,
    pub dilate_eps: f64,
    pub m_max: u64,
    pub dictionary: usize,
    pub kappa: KappaMode,
    pub block_size: u64,
    pub table: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub out: Option<PathBuf>,
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("{key}: bad list entry '{s}'"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: bad value '{v}'")))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Defaults for an experiment kind.
    pub fn new(experiment: Experiment) -> Self {
        let (system, phi) = match experiment {
            Experiment::Momo => (
                "blocks:inner=rotation;alpha=golden;m=1;spacing=squares;count=1000;seed=1".parse().unwrap(),
                Phi::Identity,
            ),
            Experiment::Pnt | Experiment::Erg1 => ("rotation:alpha=golden;x0=0;m=1".parse().unwrap(), Phi::Square),
            _ => ("rotation:alpha=golden;x0=0;m=1".parse().unwrap(), Phi::Identity),
        };
        ExperimentConfig {
            experiment,
            system,
            weights: WeightsSpec::Mobius,
            horizon: 1_000_000,
            checkpoints: None,
            checkpoint_start: 1000,
            per_decade: 4,
            h_schedule: vec![1, 2, 4, 8, 16, 32, 64],
            h0_schedule: vec![1, 2, 4],
            eps_schedule: vec![0.1, 0.05, 0.02, 0.01, 0.005],
            phi,
            grid_size: 64,
            seed: 1,
            base: BaseSpec::PrimeSquares,
            dilate_a: 10,
            dilate_eps: 0.01,
            m_max: 4,
            dictionary: 8,
            kappa: KappaMode::Zero,
            block_size: 1 << 16,
            table: None,
            out_dir: PathBuf::from("."),
            out: None,
        }
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn from_text(experiment: Experiment, text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::new(experiment);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got '{line}'", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key. Dashes in keys are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(Error::Config(format!("config is for '{e}', not '{}'", self.experiment)));
                }
            }
            "system" => self.system = value.parse()?,
            "weights" => self.weights = value.parse()?,
            "horizon" | "n_max" => self.horizon = parse_one(&key, value)?,
            "checkpoints" => self.checkpoints = Some(parse_list(&key, value)?),
            "checkpoint_start" => self.checkpoint_start = parse_one(&key, value)?,
            "per_decade" => self.per_decade = parse_one(&key, value)?,
            "h_schedule" => self.h_schedule = parse_list(&key, value)?,
            "h0_schedule" => self.h0_schedule = parse_list(&key, value)?,
            "eps_schedule" => self.eps_schedule = parse_list(&key, value)?,
            "phi" => self.phi = value.parse()?,
            "grid_size" => self.grid_size = parse_one(&key, value)?,
            "seed" => self.seed = parse_one(&key, value)?,
            "base" => self.base = value.parse()?,
            "a" | "dilate_a" => self.dilate_a = parse_one(&key, value)?,
            "eps" | "dilate_eps" => self.dilate_eps = parse_one(&key, value)?,
            "m_max" => self.m_max = parse_one(&key, value)?,
            "dictionary" => self.dictionary = parse_one(&key, value)?,
            "kappa" => self.kappa = value.parse()?,
            "block_size" => self.block_size = parse_one(&key, value)?,
            "table" => self.table = Some(PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.horizon < 2 {
            return bad(format!("horizon must be at least 2, got {}", self.horizon));
        }
        if self.h_schedule.is_empty() || self.h_schedule[0] == 0 || self.h_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("h_schedule must be positive and increasing".into());
        }
        if self.h0_schedule.is_empty() || self.h0_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return bad("h0_schedule must be non-empty and increasing".into());
        }
        if self.h0_schedule.last() > self.h_schedule.last() {
            return bad("h0_schedule exceeds h_schedule".into());
        }
        if self.grid_size == 0 || self.dictionary == 0 || self.m_max == 0 || self.dilate_a == 0 {
            return bad("grid_size, dictionary, m_max and a must be positive".into());
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<CheckpointGrid> {
        match &self.checkpoints {
            Some(points) => CheckpointGrid::new(self.horizon, points.clone()),
            None => CheckpointGrid::geometric(self.checkpoint_start.min(self.horizon), self.horizon, self.per_decade),
        }
    }

    pub fn max_h(&self) -> u64 {
        *self.h_schedule.last().unwrap()
    }

    /// Every setting as sorted `key -> value` pairs, re-parsable by [`set`](Self::set).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.to_string());
        put("system", self.system.to_string());
        put("weights", self.weights.to_string());
        put("horizon", self.horizon.to_string());
        if let Some(c) = &self.checkpoints {
            put("checkpoints", join(c));
        }
        put("checkpoint_start", self.checkpoint_start.to_string());
        put("per_decade", self.per_decade.to_string());
        put("h_schedule", join(&self.h_schedule));
        put("h0_schedule", join(&self.h0_schedule));
        put("eps_schedule", join(&self.eps_schedule));
        put("phi", self.phi.name().to_string());
        put("grid_size", self.grid_size.to_string());
        put("seed", self.seed.to_string());
        put("base", self.base.to_string());
        put("a", self.dilate_a.to_string());
        put("eps", self.dilate_eps.to_string());
        put("m_max", self.m_max.to_string());
        put("dictionary", self.dictionary.to_string());
        put("kappa", self.kappa.to_string());
        put("block_size", self.block_size.to_string());
        m
    }

    /// The echo as config-file text.
    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
