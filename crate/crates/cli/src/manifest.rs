//! Run manifests: enough provenance to replay any run bit-exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Reference to an input file with its content digest.
#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Written alongside every command's outputs. Re-running the named command
/// with the recorded parameters and the digested inputs reproduces the
/// outputs byte for byte.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub parameters: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, parameters: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            version: crate::version_string(),
            seed,
            inputs: Vec::new(),
            parameters,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(digest_file(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = ensconv_core::formats::to_json_17sig(self)
            .map_err(|e| CliError::data(e.to_string()))?;
        fs::write(path, json + "\n")
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
    }
}
