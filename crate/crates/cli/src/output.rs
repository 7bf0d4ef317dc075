//! Atomic file emission into an output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    /// Writes `contents` to a temporary sibling, then renames it into place.
    pub fn write(&self, relative: &str, contents: &str) -> Result<()> {
        let target = self.root.join(relative);
        let dir = target.parent().expect("joined path has a parent");
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let name = target
            .file_name()
            .expect("relative path names a file")
            .to_string_lossy();
        let temp = dir.join(format!(".{name}.tmp"));
        let mut file = fs::File::create(&temp).with_context(|| format!("cannot write {}", temp.display()))?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
        fs::rename(&temp, &target).with_context(|| format!("cannot move {} into place", target.display()))?;
        Ok(())
    }

    pub fn write_json(&self, relative: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(relative, &text)
    }
}

/// A file-name-safe rendering of an arc id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
