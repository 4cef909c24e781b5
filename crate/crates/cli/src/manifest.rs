// SPDX-License-Identifier: Apache-2.0

//! Run records written next to every output file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The full command line, program name excluded.
    pub argv: Vec<String>,
    /// Parsed flags, defaults filled in.
    pub flags: serde_json::Value,
    pub seeds: Vec<u64>,
    pub gate_set: Option<String>,
    pub gate_set_hash: Option<String>,
    pub param_exprs: Option<Vec<String>>,
    pub wall_time_secs: f64,
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, flags: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            argv: std::env::args().skip(1).collect(),
            flags,
            seeds: Vec::new(),
            gate_set: None,
            gate_set_hash: None,
            param_exprs: None,
            wall_time_secs: 0.0,
            results: serde_json::Value::Null,
        }
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write_for(&self, output: &Path) -> std::io::Result<PathBuf> {
        let path = Self::path_for(output);
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read_for(output: &Path) -> Option<RunManifest> {
        let text = std::fs::read_to_string(Self::path_for(output)).ok()?;
        serde_json::from_str(&text).ok()
    }
}
