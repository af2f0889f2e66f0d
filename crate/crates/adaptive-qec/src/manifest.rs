//! `run_manifest.json`: everything needed to reproduce a run's outputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::Command;

pub const MANIFEST_FILE: &str = "run_manifest.json";
pub const MANIFEST_SCHEMA: &str = "run-manifest/v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub core_version: String,
    pub command: Command,
    pub inputs: Vec<InputDigest>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: Command, inputs: Vec<InputDigest>, mut outputs: Vec<String>) -> Self {
        outputs.sort();
        Self {
            schema: MANIFEST_SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            core_version: adaptive_qec_core::VERSION.into(),
            command,
            inputs,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        if manifest.schema != MANIFEST_SCHEMA {
            bail!("unsupported manifest schema {:?}", manifest.schema);
        }
        Ok(manifest)
    }

    /// Fails if any recorded input is missing or has changed.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = InputDigest::of(&input.path)?;
            if now.sha256 != input.sha256 {
                bail!(
                    "input {} changed since the manifest was written",
                    input.path.display()
                );
            }
        }
        Ok(())
    }
}
