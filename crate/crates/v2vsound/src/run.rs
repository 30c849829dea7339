//! Run manifests: what was invoked, on what, and what it wrote.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::session;

pub const RUN_FILE: &str = "run.json";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to repeat a run. `wall_time_s` is the only field
/// that differs between otherwise identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Scenario path or preset name as given.
    pub config_path: Option<String>,
    /// SHA-256 of the scenario text.
    pub config_hash: Option<String>,
    /// SHA-256 of the resolved scene, sounder, sweep and processing setup.
    pub scene_hash: Option<String>,
    pub seed: Option<u64>,
    /// Remaining options, as strings.
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.into(),
            config_path: None,
            config_hash: None,
            scene_hash: None,
            seed: None,
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.into(),
            wall_time_s: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        session::write_json(&dir.join(RUN_FILE), self)
    }
}
