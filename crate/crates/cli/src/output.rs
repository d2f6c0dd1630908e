use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
    pub files: Vec<String>,
    pub exit_code: i32,
}

/// Files produced by one command, written together into the output directory.
#[derive(Default)]
pub struct RunFiles {
    files: Vec<(String, Vec<u8>)>,
}

impl RunFiles {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        write(&mut buf).with_context(|| format!("formatting {name}"))?;
        self.add(name, buf);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write_all(&self, dir: &Path) -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &self.files {
            write_atomic(&dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Write to a temporary sibling and rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    tmp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
