use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one command invocation: the effective configuration, hashes of
/// every input file, and the produced outputs. Written at run start and
/// finalized at run end. Identical inputs imply byte-identical outputs in
/// fixture mode; only the timestamps differ between reruns.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub input_hashes: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: Option<String>,
    pub outputs: Vec<String>,
    #[serde(skip)]
    path: PathBuf,
}

impl RunManifest {
    pub fn start(
        out_dir: &Path,
        command: &str,
        seed: u64,
        config: serde_json::Value,
    ) -> std::io::Result<RunManifest> {
        std::fs::create_dir_all(out_dir)?;
        let manifest = RunManifest {
            command: command.to_string(),
            config,
            seed,
            input_hashes: BTreeMap::new(),
            started_at: chrono::Utc::now().to_rfc3339(),
            finished_at: None,
            outputs: Vec::new(),
            path: out_dir.join("manifest.json"),
        };
        manifest.flush()?;
        Ok(manifest)
    }

    pub fn hash_input(&mut self, path: &Path) {
        if let Ok(bytes) = std::fs::read(path) {
            let digest = Sha256::digest(&bytes);
            self.input_hashes
                .insert(path.display().to_string(), format!("{digest:x}"));
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(&mut self) -> std::io::Result<()> {
        self.finished_at = Some(chrono::Utc::now().to_rfc3339());
        self.flush()
    }

    fn flush(&self) -> std::io::Result<()> {
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&self.path, body.as_bytes())
    }
}

/// Write via a temp file and rename, so readers never observe partial files.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
