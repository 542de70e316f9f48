use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: &str = "1.0";

/// The published JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Evolve,
    Decay,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: Command,
    pub config: RunConfig,
    /// Speed/mass condition checks of the configured system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<kgres::params::ConditionReport>,
    pub results: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    /// The only field that may differ between identical runs.
    pub wall_clock_seconds: f64,
}

impl ReportDocument {
    pub fn new(command: Command, config: &RunConfig, results: serde_json::Value) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION.into(),
            command,
            config: config.clone(),
            conditions: None,
            results,
            tolerances: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The document with the wall-clock field cleared, for comparisons.
    pub fn without_timing(&self) -> Self {
        ReportDocument {
            wall_clock_seconds: 0.0,
            ..self.clone()
        }
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<(), CliError> {
        ensure_dir(dir)?;
        let path = dir.join(name);
        fs::write(&path, self.to_json()).map_err(|source| CliError::Io { path, source })
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("results serialize")
}
