use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Input files read by a command, with digests for the manifest.
#[derive(Debug, Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = read_text(path)?;
        self.digests.push(InputDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(text)
    }
}

/// Files written by one command. Unless [`Outputs::commit`] is called, every
/// file and directory it created is removed when it is dropped.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_dir(&mut self, dir: &Path) -> CliResult<()> {
        let mut missing = Vec::new();
        let mut at = Some(dir);
        while let Some(d) = at {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            at = d.parent();
        }
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        self.dirs.extend(missing);
        Ok(())
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            self.create_dir(parent)?;
        }
        fs::write(path, contents).map_err(|e| io_error(path, e))?;
        self.files.push(path.to_path_buf());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Internal(format!("serializing {}: {e}", path.display())))?;
        text.push('\n');
        self.write(path, &text)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        self.dirs.sort_by_key(|d| std::cmp::Reverse(d.components().count()));
        for d in &self.dirs {
            let _ = fs::remove_dir(d);
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("cannot write {}: {e}", path.display()))
}

/// Everything needed to re-run a command.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, A: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub args: &'a A,
    pub resolved: R,
    pub inputs: &'a [InputDigest],
    pub outputs: Vec<String>,
}

impl<'a, A: Serialize, R: Serialize> Manifest<'a, A, R> {
    pub fn new(command: &'static str, args: &'a A, resolved: R, inputs: &'a [InputDigest]) -> Self {
        Manifest {
            tool: "modanova",
            version: env!("CARGO_PKG_VERSION"),
            command,
            args,
            resolved,
            inputs,
            outputs: Vec::new(),
        }
    }
}
