//! Where command output goes: files in a directory, written atomically, or
//! stdout.

use std::io::Write;
use std::path::{Path, PathBuf};
use tempfile::NamedTempFile;

pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> std::io::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    /// Writes `name` into the output directory, or prints it.
    pub fn write(&self, name: &str, contents: &str) -> std::io::Result<()> {
        match &self.dir {
            Some(d) => write_atomic(&d.join(name), contents.as_bytes()),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(contents.as_bytes())?;
                out.flush()
            }
        }
    }

    /// Human-readable progress: stdout when files are the product, stderr
    /// when stdout carries data.
    pub fn note(&self, msg: &str) {
        if self.is_dir() {
            print!("{msg}");
        } else {
            eprint!("{msg}");
        }
    }
}

/// Temp file in the target directory, then rename over the destination.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
