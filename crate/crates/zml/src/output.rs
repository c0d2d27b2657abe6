//! Run manifests and atomic output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub config: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub version: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            config: None,
            output_dir: None,
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
        self
    }

    /// Single-line form used in CSV trailers.
    pub fn comment_line(&self) -> String {
        format!("# manifest {}\n", serde_json::to_string(self).expect("manifest serializes"))
    }
}

/// Renders a CSV table followed by the manifest comment line.
pub fn csv_document(header: &[&str], rows: &[Vec<String>], manifest: &RunManifest) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let mut bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    bytes.extend_from_slice(manifest.comment_line().as_bytes());
    Ok(bytes)
}

/// Writes `bytes` to `dir/name` through a temporary file and rename, or to
/// stdout without a directory.
pub fn emit(bytes: &[u8], dir: Option<&Path>, name: &str) -> Result<(), CliError> {
    match dir {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(dir.join(name)).map_err(|e| CliError::Io(e.error))?;
        }
    }
    Ok(())
}
