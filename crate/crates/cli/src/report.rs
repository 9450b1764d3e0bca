use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::csvio::{read_bytes, write_json};
use crate::error::Result;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotConverged | Status::CheckFailed => 2,
        }
    }
}

/// Post-hoc invariant check recorded in a report.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub max_error: f64,
    pub tolerance: f64,
    pub ok: bool,
}

impl Check {
    pub fn new(max_error: f64, tolerance: f64) -> Self {
        Self {
            max_error,
            tolerance,
            ok: max_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub status: Status,
    pub inputs: Vec<InputDigest>,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
    pub diagnostics: BTreeMap<String, Value>,
    pub checks: BTreeMap<String, Check>,
    pub wall_time_s: f64,
}

/// Collects a report while a command runs.
pub struct Recorder {
    started: Instant,
    report: RunReport,
}

impl Recorder {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            started: Instant::now(),
            report: RunReport {
                command: command.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                status: Status::Ok,
                inputs: Vec::new(),
                config: config.clone(),
                outputs: Vec::new(),
                diagnostics: BTreeMap::new(),
                checks: BTreeMap::new(),
                wall_time_s: 0.0,
            },
        }
    }

    /// Read an input file, recording its digest.
    pub fn input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = read_bytes(path)?;
        self.report.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn output(&mut self, path: PathBuf) -> PathBuf {
        self.report.outputs.push(path.clone());
        path
    }

    pub fn diag(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.report.diagnostics.insert(key.to_string(), v);
    }

    pub fn check(&mut self, name: &str, max_error: f64, tolerance: f64) {
        let c = Check::new(max_error, tolerance);
        if !c.ok && self.report.status == Status::Ok {
            self.report.status = Status::CheckFailed;
        }
        self.report.checks.insert(name.to_string(), c);
    }

    pub fn not_converged(&mut self) {
        self.report.status = Status::NotConverged;
    }

    /// Write the report to `path` and return the run status.
    pub fn finish(mut self, path: PathBuf) -> Result<Status> {
        self.report.outputs.push(path.clone());
        self.report.wall_time_s = self.started.elapsed().as_secs_f64();
        write_json(&path, &self.report)?;
        Ok(self.report.status)
    }
}
