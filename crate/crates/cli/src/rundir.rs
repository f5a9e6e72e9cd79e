//! Run directories: built under a hidden staging name and renamed into place
//! once every artifact and the manifest are written. A failed run leaves the
//! staging directory behind with an `INCOMPLETE` marker.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const MARKER: &str = "INCOMPLETE";
pub const MANIFEST: &str = "manifest.json";

pub struct RunDir {
    staging: PathBuf,
    out: PathBuf,
    artifacts: Vec<String>,
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{what} {}: {e}", path.display()))
}

/// `<parent>/.<name>.partial`
pub fn staging_path(out: &Path) -> CliResult<PathBuf> {
    let name = out
        .file_name()
        .ok_or_else(|| CliError::config(format!("bad output directory {}", out.display())))?;
    let parent = out.parent().unwrap_or(Path::new(""));
    Ok(parent.join(format!(".{}.partial", name.to_string_lossy())))
}

impl RunDir {
    pub fn create(out: &Path, force: bool) -> CliResult<Self> {
        if out.exists() {
            if !force {
                return Err(CliError::config(format!(
                    "output directory {} exists (use --force to replace it)",
                    out.display()
                )));
            }
            fs::remove_dir_all(out).map_err(|e| io_err("remove", out, e))?;
        }
        let staging = staging_path(out)?;
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| io_err("remove", &staging, e))?;
        }
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io_err("create", parent, e))?;
        }
        fs::create_dir(&staging).map_err(|e| io_err("create", &staging, e))?;
        fs::write(staging.join(MARKER), "run did not finish\n")
            .map_err(|e| io_err("write", &staging, e))?;
        Ok(Self {
            staging,
            out: out.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    /// Path for an artifact inside the run; the name is recorded in the manifest.
    pub fn artifact(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let path = self.staging.join(&name);
        self.artifacts.push(name);
        path
    }

    /// Writes the manifest and moves the run into place.
    pub fn finish<C: Serialize>(
        mut self,
        command: &str,
        seed: u64,
        config: &C,
    ) -> CliResult<PathBuf> {
        self.artifacts.sort();
        self.artifacts.dedup();
        let manifest = serde_json::json!({
            "tool": env!("CARGO_BIN_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "config": config,
            "artifacts": self.artifacts,
        });
        harsanyi::io::write_json(&self.staging.join(MANIFEST), &manifest)?;
        fs::remove_file(self.staging.join(MARKER))
            .map_err(|e| io_err("remove marker in", &self.staging, e))?;
        fs::rename(&self.staging, &self.out).map_err(|e| io_err("rename into", &self.out, e))?;
        Ok(self.out)
    }
}
