//! Run reports and artifact writing. Everything written here is a pure
//! function of the resolved config; wall time goes to a separate file.

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use stit_core::Estimate;

/// A reported statistic with its standard error and sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Metric {
    /// A value computed without sampling error.
    pub fn exact(value: f64, n: usize) -> Self {
        Self { value, std_error: 0.0, n }
    }

    pub fn mean_of(xs: &[f64]) -> Self {
        Estimate::from_samples(xs).into()
    }
}

impl From<Estimate> for Metric {
    fn from(e: Estimate) -> Self {
        Self { value: e.value, std_error: e.std_error, n: e.n }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Metric>,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
    /// Verdict of commands that test a hypothesis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(command: &str, config: ExperimentConfig) -> Self {
        Self { command: command.into(), config, metrics: BTreeMap::new(), artifacts: Vec::new(), passed: None, wall_time_s: 0.0 }
    }

    pub fn metric(&mut self, name: impl Into<String>, m: Metric) {
        self.metrics.insert(name.into(), m);
    }
}

/// Output directory that records what it writes.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn take_written(&mut self) -> Vec<String> {
        std::mem::take(&mut self.written)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.written.push(name.into());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.root.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.into());
        Ok(())
    }

    /// Writes `report.json`, listing every artifact written so far, and the
    /// wall time to `timing.json`.
    pub fn finish(&mut self, mut report: RunReport) -> CliResult<RunReport> {
        report.artifacts = self.take_written();
        report.artifacts.push("report.json".into());
        self.json("report.json", &report)?;
        #[derive(Serialize)]
        struct Timing<'a> {
            command: &'a str,
            wall_time_s: f64,
        }
        self.json("timing.json", &Timing { command: &report.command, wall_time_s: report.wall_time_s })?;
        self.take_written();
        Ok(report)
    }
}

/// Formats a float for CSV output (shortest round-trip representation).
pub fn f(x: f64) -> String {
    format!("{x}")
}
