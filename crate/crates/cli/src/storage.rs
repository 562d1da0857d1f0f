//! Storage units on the local filesystem.
//!
//! ```text
//! <root>/
//!   decisions.jsonl     one DecisionRecord per processed submission
//!   <storage_unit>/     one directory per unit, created on first use
//!     <file_id>         routed payload bytes
//! ```

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use pbcap_core::Decision;

use crate::error::{CliError, Result};
use crate::formats::DecisionRecord;

pub const DECISION_LOG: &str = "decisions.jsonl";

fn check_path_component(name: &str, what: &str) -> Result<(), String> {
    if name.is_empty() || name == "." || name == ".." {
        return Err(format!("invalid {what} `{name}`"));
    }
    if name.chars().any(|c| matches!(c, '/' | '\\' | '\0') || c.is_control()) {
        return Err(format!("{what} `{name}` must be a single path component"));
    }
    Ok(())
}

/// Unit names become directory names under the storage root.
pub fn check_unit_name(name: &str) -> Result<(), String> {
    check_path_component(name, "storage unit")?;
    if name == DECISION_LOG {
        return Err(format!("storage unit may not be named `{DECISION_LOG}`"));
    }
    Ok(())
}

pub fn check_file_id(id: &str) -> Result<(), String> {
    check_path_component(id, "file id")
}

#[derive(Debug, Clone)]
pub struct StorageLayout {
    root: PathBuf,
}

impl StorageLayout {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        if !root.is_dir() {
            return Err(CliError::Usage(format!("storage root {} is not a directory", root.display())));
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn log_path(&self) -> PathBuf {
        self.root.join(DECISION_LOG)
    }

    pub fn unit_dir(&self, unit: &str) -> PathBuf {
        self.root.join(unit)
    }

    /// Copies the payload into the decision's unit. Refuses to overwrite a
    /// file already routed under the same id.
    pub fn store(&self, decision: &Decision, payload: &[u8]) -> Result<PathBuf> {
        check_unit_name(&decision.storage_unit).map_err(CliError::Usage)?;
        check_file_id(&decision.file_id).map_err(CliError::Usage)?;
        let dir = self.unit_dir(&decision.storage_unit);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let dest = dir.join(&decision.file_id);
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&dest)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => CliError::Exists(dest.clone()),
                _ => CliError::io(&dest, e),
            })?;
        f.write_all(payload).map_err(|e| CliError::io(&dest, e))?;
        Ok(dest)
    }

    pub fn append_log(&self, decision: &Decision) -> Result<()> {
        let path = self.log_path();
        let mut line = serde_json::to_vec(&DecisionRecord::from(decision)).expect("decision serializes");
        line.push(b'\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CliError::io(&path, e))?;
        f.write_all(&line).map_err(|e| CliError::io(&path, e))
    }

    pub fn read_log(&self) -> Result<Vec<DecisionRecord>> {
        let path = self.log_path();
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        text.lines()
            .map(|l| serde_json::from_str(l).map_err(|e| CliError::decode(&path, e)))
            .collect()
    }

    /// Number of payload files across all unit directories.
    pub fn stored_count(&self) -> Result<usize> {
        let mut n = 0;
        for entry in fs::read_dir(&self.root).map_err(|e| CliError::io(&self.root, e))? {
            let entry = entry.map_err(|e| CliError::io(&self.root, e))?;
            if entry.path().is_dir() {
                n += fs::read_dir(entry.path()).map_err(|e| CliError::io(entry.path(), e))?.count();
            }
        }
        Ok(n)
    }
}
