//! Small filesystem helpers shared by the pipeline stages.

use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::error::{Error, Result};

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `text`, creating parent directories.
pub fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn remove_dir(path: &Path) -> Result<()> {
    match std::fs::remove_dir_all(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Absolute, symlink-free form of `path` when it exists, else `path` joined
/// onto the current directory.
pub fn absolute(path: &Path) -> PathBuf {
    path.canonicalize().unwrap_or_else(|_| {
        std::env::current_dir()
            .map(|d| d.join(path))
            .unwrap_or_else(|_| path.to_path_buf())
    })
}

pub fn same_path(a: &Path, b: &Path) -> bool {
    absolute(a) == absolute(b)
}

/// Fails with [`Error::WriteConflict`] when `dir` exists and is not empty.
pub fn claim_empty_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() {
            return Err(Error::WriteConflict(dir.to_path_buf()));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Copies a project tree, leaving out its `target/` and `.git/` directories
/// and anything under `skip`.
pub fn copy_project(src: &Path, dst: &Path, skip: &[PathBuf]) -> Result<()> {
    let skip: Vec<PathBuf> = skip.iter().map(|p| absolute(p)).collect();
    let src_abs = absolute(src);
    let walker = WalkDir::new(&src_abs).sort_by_file_name().into_iter().filter_entry(|e| {
        let rel = e.path().strip_prefix(&src_abs).unwrap_or(e.path());
        let top_level_build = rel.components().count() == 1
            && matches!(rel.to_str(), Some("target") | Some(".git"));
        !top_level_build && !skip.iter().any(|s| e.path().starts_with(s))
    });
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_default();
            Error::io(path, e.into())
        })?;
        let rel = entry.path().strip_prefix(&src_abs).expect("walk stays under root");
        let to = dst.join(rel);
        if entry.file_type().is_dir() {
            std::fs::create_dir_all(&to).map_err(|e| Error::io(&to, e))?;
        } else if entry.file_type().is_file() {
            std::fs::copy(entry.path(), &to).map_err(|e| Error::io(&to, e))?;
        }
    }
    Ok(())
}
