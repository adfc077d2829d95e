use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Everything needed to replay a run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub rng_seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, rng_seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: "cpdnet",
            version: cpdnet_core::VERSION,
            subcommand,
            rng_seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }
}

/// Output files are staged in memory and written together; if any write
/// fails the files already written are removed.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .map(|(n, _)| self.dir.join(n).display().to_string())
            .collect()
    }

    /// Writes staged files followed by `manifest.json`.
    pub fn commit(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self.names();
        manifest
            .outputs
            .push(self.dir.join("manifest.json").display().to_string());
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        self.add("manifest.json", text);

        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating output directory {}", self.dir.display()))?;
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
        }
        Ok(())
    }
}
