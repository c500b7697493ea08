//! Run manifests: a JSON sidecar `<output>.manifest.json` echoing the inputs and
//! listing each output file with its SHA-256.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use levyheat::levy::ConditionReport;
use levyheat::sim::SimWindow;
use levyheat::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct OutputRef {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: BTreeMap<String, String>,
    pub fingerprint: String,
    pub seed: Option<u64>,
    pub window: Option<SimWindow>,
    pub replicas: Option<usize>,
    pub status: &'static str,
    pub certificates: Vec<ConditionReport>,
    pub extra: serde_json::Value,
    pub outputs: Vec<OutputRef>,
}

/// Manifest plus its content hash; wall-clock time is kept outside the hashed part.
#[derive(Debug, Serialize)]
struct Envelope<'a> {
    manifest: &'a RunManifest,
    content_sha256: String,
    wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(subcommand: &str, config: BTreeMap<String, String>, fingerprint: String) -> Self {
        RunManifest {
            tool: "levyheat",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            config,
            fingerprint,
            seed: None,
            window: None,
            replicas: None,
            status: "pass",
            certificates: Vec::new(),
            extra: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `body` to `out` (or stdout when `out` is None) and, for files, the manifest sidecar.
pub fn emit(out: Option<&Path>, body: &str, mut manifest: RunManifest, started: Instant) -> Result<()> {
    let Some(path) = out else {
        print!("{body}");
        return Ok(());
    };
    std::fs::write(path, body)?;
    manifest.outputs.push(OutputRef {
        file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: sha256_hex(body.as_bytes()),
    });
    let content = serde_json::to_string(&manifest).map_err(|e| levyheat::Error::InvalidArgument(e.to_string()))?;
    let env = Envelope { manifest: &manifest, content_sha256: sha256_hex(content.as_bytes()), wall_clock_seconds: started.elapsed().as_secs_f64() };
    let text = serde_json::to_string_pretty(&env).map_err(|e| levyheat::Error::InvalidArgument(e.to_string()))?;
    std::fs::write(manifest_path(path), text + "\n")?;
    Ok(())
}
