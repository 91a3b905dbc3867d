// Copyright 2026 The leaknull Authors
// SPDX-License-Identifier: Apache-2.0

//! Output directory handling. Every file is written to a temporary sibling
//! and renamed into place, so readers never observe a partial file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub parameters: BTreeMap<String, Value>,
    pub output_dir: String,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::input(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let io = |e: std::io::Error| CliError::input(format!("writing {name}: {e}"));
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.flush().map_err(io)?;
        let path = self.root.join(name);
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
        text.push('\n');
        self.write_atomic(name, text.as_bytes())
    }

    /// CSV preceded by a `#` comment line naming the units of each column.
    pub fn csv<E: std::fmt::Display>(
        &mut self,
        name: &str,
        units: &str,
        body: impl FnOnce(&mut Vec<u8>) -> Result<(), E>,
    ) -> Result<PathBuf, CliError> {
        let mut buf = format!("# units: {units}\n").into_bytes();
        body(&mut buf).map_err(|e| CliError::input(format!("writing {name}: {e}")))?;
        self.write_atomic(name, &buf)
    }

    pub fn manifest(
        &mut self,
        command: &str,
        config_path: &str,
        parameters: BTreeMap<String, Value>,
        seed: u64,
    ) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_path: config_path.to_string(),
            parameters,
            output_dir: self.root.display().to_string(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.written.clone(),
        };
        self.json("manifest.json", &manifest)
    }
}
