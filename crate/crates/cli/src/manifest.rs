use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::write_file;

/// Record of one command run. Everything except `wall_time_secs` is a pure
/// function of the command's inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: 0.0,
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_file(path, json + "\n")
    }
}
