//! Run provenance.
//!
//! Every run that produces files also writes a small JSON manifest recording
//! the tool version, the subcommand, the fully resolved configuration,
//! SHA-256 digests of the inputs, and the paths of the artifacts written.
//! Reruns with identical inputs and config produce identical artifacts, so
//! the manifest is enough to audit where any output file came from.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One input file with its content digest.
#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to a run's primary output.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &BTreeMap<String, String>) -> Self {
        Self {
            tool: "genomotif".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Digests `path` and records it as an input.
    pub fn add_input(&mut self, path: &Path) -> io::Result<()> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn add_artifact(&mut self, path: &Path) {
        self.artifacts.push(path.display().to_string());
    }

    /// Writes the manifest as pretty JSON.
    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        file.write_all(b"\n")
    }
}

/// Hex SHA-256 of a file's contents, streamed.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    use std::fmt::Write as _;
    let mut hex = String::with_capacity(64);
    for byte in hasher.finalize() {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}

/// Default manifest location: the primary output path plus `.run.json`.
pub fn default_manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output.as_os_str().to_os_string();
    name.push(".run.json");
    PathBuf::from(name)
}
