use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extract::DensityCertificate;
use crate::momo::StatSummary;

/// Version tag written into every CSV header.
pub const CSV_VERSION: &str = "v1";

/// A table of numeric rows with named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(columns: &[&str]) -> Self {
        Trajectory { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// A stage that did not complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub name: String,
    pub config: BTreeMap<String, String>,
    pub summary: BTreeMap<String, f64>,
    pub certificates: BTreeMap<String, DensityCertificate>,
    pub trajectories: BTreeMap<String, Trajectory>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stats: Vec<StatSummary>,
    pub failure: Option<StageFailure>,
}

impl PipelineReport {
    pub fn new(name: &str, config: BTreeMap<String, String>) -> Self {
        PipelineReport { name: name.to_string(), config, ..Default::default() }
    }

    pub fn scalar(&mut self, key: &str, value: f64) {
        self.summary.insert(key.to_string(), value);
    }

    /// Records the first failure only.
    pub fn fail(&mut self, stage: &str, reason: impl Into<String>) {
        if self.failure.is_none() {
            self.failure = Some(StageFailure { stage: stage.to_string(), reason: reason.into() });
        }
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn write_csv<W: Write>(&self, traj_name: &str, mut w: W) -> Result<()> {
        let t = &self.trajectories[traj_name];
        writeln!(w, "# momo-lab {}/{} {CSV_VERSION}", self.name, traj_name)?;
        for (k, v) in &self.config {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{}", t.columns.join(","))?;
        for row in &t.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// Writes `<name>_<trajectory>.csv` for each trajectory and
    /// `<name>_report.json`; returns the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for key in self.trajectories.keys() {
            let p = dir.join(format!("{}_{key}.csv", self.name));
            let mut buf = Vec::new();
            self.write_csv(key, &mut buf)?;
            fs::write(&p, buf)?;
            paths.push(p);
        }
        let p = dir.join(format!("{}_report.json", self.name));
        let mut buf = Vec::new();
        self.write_json(&mut buf)?;
        buf.push(b'\n');
        fs::write(&p, buf)?;
        paths.push(p);
        Ok(paths)
    }

    /// One-line human summary.
    pub fn headline(&self) -> String {
        let mut parts = vec![self.name.clone()];
        for (k, v) in &self.summary {
            parts.push(format!("{k}={v:.6}"));
        }
        match &self.failure {
            Some(f) => parts.push(format!("FAILED at {}: {}", f.stage, f.reason)),
            None => parts.push("ok".into()),
        }
        parts.join(" ")
    }
}
