use super::commands::Outcome;
use super::ingest::sha256_hex;
use super::{CliError, RunConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Record of one run: everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    /// Input path as given on the command line to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes via a temporary file in the same directory and renames it into place.
pub(crate) fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut f = std::fs::File::create(&tmp).map_err(|e| io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, &target).map_err(|e| io(&target, e))
}

pub(crate) fn write_all(config: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let dir = config.out_dir();
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in &outcome.files {
        write_atomic(dir, name, bytes)?;
        outputs.insert(name.clone(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.name().to_string(),
        master_seed: config.seed(),
        inputs: outcome.inputs.clone(),
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_atomic(dir, "manifest.json", text.as_bytes())
}
