//! Provenance block written into every output file.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the effective config and command arguments, output paths
    /// excluded.
    pub config_hash: String,
    /// SHA-256 of each input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new<A: Serialize>(command: &str, cfg: &RunConfig, args: &A) -> Self {
        let canonical = serde_json::json!({ "config": cfg, "command": command, "args": args });
        Manifest {
            tool: "nsrand",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_hash: sha256_hex(canonical.to_string().as_bytes()),
            inputs: BTreeMap::new(),
        }
    }

    /// Reads an input file, recording its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| Failure::input(format!("{} is not UTF-8", path.display())).into())
    }

    /// `# key: value` lines for the head of a CSV file.
    pub fn csv_comment(&self) -> String {
        let mut s = format!("# {} {}\n# command: {}\n# config_hash: {}\n", self.tool, self.version, self.command, self.config_hash);
        for (path, hash) in &self.inputs {
            s.push_str(&format!("# input {path}: {hash}\n"));
        }
        s
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}
