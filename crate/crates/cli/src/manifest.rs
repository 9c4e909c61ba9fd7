//! Run manifests and output-directory locking.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use pathsel_core::ingest::{RunConfig, TraceSchema};
use pathsel_core::pipeline::Signal;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";
const LOCK_FILE: &str = ".pathsel.lock";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub file: String,
    pub pattern: String,
    pub seed: u64,
}

/// Everything needed to re-run a command. Written without timestamps so that
/// identical runs produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Input paths as given on the command line.
    #[serde(default)]
    pub inputs: Vec<String>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Signal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<TraceSchema>,
    /// One line per chain stage, in signal order.
    #[serde(default)]
    pub chain: Vec<String>,
    #[serde(default)]
    pub traces: Vec<TraceEntry>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: "pathsel".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            signal: None,
            schema: None,
            chain: config.chain.stages.iter().map(|s| s.to_string()).collect(),
            traces: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self)
            .map_err(|e| CliError::Input(format!("cannot serialize manifest: {e}")))?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: malformed manifest: {e}", path.display())))
    }
}

/// Exclusive claim on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        let mut f: File = match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(CliError::Locked(dir.to_path_buf()))
            }
            Err(e) => return Err(CliError::io(&path, e)),
        };
        let _ = writeln!(f, "{}", std::process::id());
        Ok(Self { path })
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
