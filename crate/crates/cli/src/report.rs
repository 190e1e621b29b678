//! Report envelopes and output files.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use balayage_core::experiments::InvariantCheck;
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;
use crate::CliError;

/// Every JSON report has this shape; `result` depends on the command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report<T> {
    pub schema_version: u32,
    pub command: String,
    pub config_sha256: String,
    pub tol: f64,
    pub result: T,
    pub checks: Vec<InvariantCheck>,
}

impl<T> Report<T> {
    pub fn new(command: &str, config_sha256: &str, tol: f64, result: T, checks: Vec<InvariantCheck>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config_sha256: config_sha256.to_string(),
            tol,
            result,
            checks,
        }
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    written_at_unix: u64,
    report: String,
}

pub struct Output {
    pub dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// Writes `<command>.json` and the timestamp sidecar `<command>.meta.json`.
    pub fn write_report<T: Serialize>(&self, command: &str, report: &Report<T>) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{command}.json"));
        let mut text = serde_json::to_string_pretty(report).map_err(balayage_core::Error::from)?;
        text.push('\n');
        write(&path, text.as_bytes())?;
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = Sidecar {
            command,
            written_at_unix: stamp,
            report: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
        };
        let meta_text = serde_json::to_string_pretty(&meta).map_err(balayage_core::Error::from)?;
        write(&self.dir.join(format!("{command}.meta.json")), meta_text.as_bytes())?;
        Ok(path)
    }

    pub fn csv_path(&self, command: &str) -> PathBuf {
        self.dir.join(format!("{command}.csv"))
    }

    pub fn create_csv(&self, command: &str) -> Result<std::fs::File, CliError> {
        let path = self.csv_path(command);
        std::fs::File::create(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
