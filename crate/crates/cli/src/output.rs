//! Artifact writing and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub command: String,
    pub version: &'static str,
    /// SHA-256 of the resolved inputs (command and config after overrides).
    pub inputs_sha256: String,
    pub outputs: Vec<Artifact>,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Sink {
    dir: PathBuf,
    pub format: Format,
    outputs: Vec<Artifact>,
    started: Instant,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), format, outputs: Vec::new(), started: Instant::now() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.outputs.push(Artifact { path, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// CSV with a leading `# schema: <schema>` line.
    pub fn csv(&mut self, name: &str, schema: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut bytes = format!("# schema: {schema}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut bytes);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        self.write(name, &bytes)
    }

    pub fn finish(self, command: &str, inputs: &[u8]) -> Result<Manifest, CliError> {
        let manifest = Manifest {
            schema: "manifest/1",
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            inputs_sha256: sha256_hex(inputs),
            outputs: self.outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join(format!("{command}.manifest.json"));
        let bytes = serde_json::to_vec_pretty(&manifest)?;
        fs::write(&path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(manifest)
    }
}

/// Shortest round-trip formatting for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
