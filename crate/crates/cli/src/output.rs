use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Records files and directories created by a command and deletes them
/// again unless the command commits.
#[derive(Default)]
pub struct Outputs {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    /// Creates `dir` (and missing parents), remembering which ones are new.
    pub fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        let mut missing = Vec::new();
        let mut cur = Some(dir);
        while let Some(d) = cur {
            if d.as_os_str().is_empty() || d.exists() {
                break;
            }
            missing.push(d.to_path_buf());
            cur = d.parent();
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        missing.reverse();
        self.dirs.extend(missing);
        Ok(())
    }

    /// Registers `path` as an output and makes sure its directory exists.
    pub fn file(&mut self, path: &Path) -> Result<PathBuf> {
        if let Some(parent) = path.parent() {
            self.ensure_dir(parent)?;
        }
        self.files.push(path.to_path_buf());
        Ok(path.to_path_buf())
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
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
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir(d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncommitted_outputs_are_removed() {
        let root = tempfile::tempdir().unwrap();
        let existing = root.path().join("keep.txt");
        fs::write(&existing, "x").unwrap();
        let nested = root.path().join("a/b");
        {
            let mut out = Outputs::default();
            let f = out.file(&nested.join("out.txt")).unwrap();
            fs::write(f, "partial").unwrap();
        }
        assert!(!root.path().join("a").exists());
        assert!(existing.exists());
        {
            let mut out = Outputs::default();
            let f = out.file(&nested.join("out.txt")).unwrap();
            fs::write(f, "done").unwrap();
            out.commit();
        }
        assert!(nested.join("out.txt").exists());
    }
}
