//! CSV tables, JSON documents and the run report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::{RunConfig, Scenario};
use crate::CliError;

pub const CHI_HEADER: [&str; 7] = ["beta_re", "beta_im", "chi_re", "chi_im", "dp0", "dp_half_pi", "shots"];
pub const WIGNER_HEADER: [&str; 3] = ["z_re", "z_im", "w"];
pub const SCAN_HEADER: [&str; 4] = ["theta", "alpha_re", "alpha_im", "infidelity"];
pub const AMPLITUDE_HEADER: [&str; 4] = ["n", "re", "im", "probability"];

/// Collects the files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.display().to_string(), e)
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(io_err(root))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    /// Write a CSV table; every row is already formatted.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.root.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Csv(path.display().to_string(), e))?;
        w.write_record(header).map_err(|e| CliError::Csv(path.display().to_string(), e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| CliError::Csv(path.display().to_string(), e))?;
        }
        w.flush().map_err(io_err(&path))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.root.join(name);
        write_json(&path, value)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Config(e.to_string()))?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Shortest round-trip form, in exponent notation for very small or large
/// magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    /// Loading this with `--config` reruns the job.
    pub config: RunConfig,
    pub files: Vec<String>,
    pub summary: BTreeMap<String, Value>,
    pub tolerances_met: bool,
    pub duration_seconds: f64,
}

pub const REPORT_FILE: &str = "report.json";

impl RunReport {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(REPORT_FILE);
        write_json(&path, self)?;
        Ok(path)
    }
}
