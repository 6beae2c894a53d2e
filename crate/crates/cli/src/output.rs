//! Artifact writers. Floats in CSV files carry 17 significant digits.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use qex_core::tuple_io::write_tuple_file;
use qex_core::MatrixTuple;
use serde::Serialize;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Collects the files written by one command.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn target(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.target(name)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.target(name)?;
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn tuple(&mut self, name: &str, t: &MatrixTuple) -> Result<()> {
        let path = self.target(name)?;
        write_tuple_file(&path, t).with_context(|| format!("writing {}", path.display()))
    }

    pub fn into_list(self) -> Vec<String> {
        self.written
    }
}
