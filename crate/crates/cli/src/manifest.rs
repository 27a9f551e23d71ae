//! `<command>.manifest.toml`: what produced the files in an output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    /// Input path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output path (relative to the manifest) → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub config: toml::Value,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(Manifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            config: toml::Value::try_from(config).context("serialising config")?,
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Hashes every file under `dir` (manifests excepted) and writes
    /// `dir/<command>.manifest.toml`.
    pub fn write(mut self, dir: &Path) -> Result<()> {
        let mut files = Vec::new();
        collect(dir, dir, &mut files)?;
        for rel in files {
            if !rel.ends_with(".manifest.toml") {
                self.outputs
                    .insert(rel.clone(), sha256_file(&dir.join(&rel))?);
            }
        }
        let text = toml::to_string(&self).context("serialising manifest")?;
        fs::write(dir.join(format!("{}.manifest.toml", self.command)), text)?;
        Ok(())
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).expect("under root");
            out.push(
                rel.components()
                    .map(|c| c.as_os_str().to_string_lossy())
                    .collect::<Vec<_>>()
                    .join("/"),
            );
        }
    }
    Ok(())
}
