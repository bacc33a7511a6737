use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// SHA-256 of the resolved config as compact JSON.
    pub config_hash: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub wall_time_s: f64,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub config: ResolvedConfig,
}

pub fn config_hash(cfg: &ResolvedConfig) -> Result<String> {
    let json = serde_json::to_vec(cfg)?;
    let digest = Sha256::digest(&json);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(cfg: &ResolvedConfig, seeds: Vec<u64>, wall: Duration, outputs: Vec<String>) -> Result<Self> {
        Ok(Self {
            experiment: cfg.experiment.name().to_string(),
            config_hash: config_hash(cfg)?,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            wall_time_s: wall.as_secs_f64(),
            outputs,
            config: cfg.clone(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Collects output files and refuses paths that leave the output
/// directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)
            .with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Registers `name` and returns its full path.
    pub fn file(&mut self, name: &str) -> Result<PathBuf> {
        let rel = Path::new(name);
        if rel.is_absolute()
            || rel
                .components()
                .any(|c| !matches!(c, std::path::Component::Normal(_)))
        {
            bail!("output name `{name}` escapes the output directory");
        }
        if let Some(parent) = rel.parent() {
            std::fs::create_dir_all(self.root.join(parent))?;
        }
        self.files.push(name.to_string());
        Ok(self.root.join(rel))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.file(name)?;
        std::fs::write(&path, serde_json::to_string_pretty(value)?)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// CSV with a header row and one record per row.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = self.file(name)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, ResolvedConfig};

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ResolvedConfig::defaults(Experiment::Qpt).unwrap();
        let mut b = a.clone();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        b.seed += 1;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }

    #[test]
    fn escaping_names_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        assert!(out.file("../x.csv").is_err());
        assert!(out.file("/etc/x").is_err());
        assert!(out.file("grids/a.csv").is_ok());
        assert_eq!(out.files(), ["grids/a.csv"]);
    }
}
