//! Config files, flag overrides and the output manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Usage errors exit with 2, computation failures with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<robin_wander::Error> for CliError {
    fn from(e: robin_wander::Error) -> Self {
        match e {
            robin_wander::Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
            other => CliError::Compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// An interval written `lo:hi` on the command line or `[lo, hi]` in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowRepr", into = "[f64; 2]")]
pub struct Window(pub f64, pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum WindowRepr {
    Pair([f64; 2]),
    Text(String),
}

impl TryFrom<WindowRepr> for Window {
    type Error = String;
    fn try_from(r: WindowRepr) -> Result<Self, String> {
        match r {
            WindowRepr::Pair([a, b]) => Ok(Window(a, b)),
            WindowRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Window> for [f64; 2] {
    fn from(w: Window) -> Self {
        [w.0, w.1]
    }
}

impl std::str::FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("interval '{s}' must be written lo:hi"))?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower bound in '{s}'"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper bound in '{s}'"))?;
        if !(lo < hi) {
            return Err(format!("interval '{s}' must satisfy lo < hi"));
        }
        Ok(Window(lo, hi))
    }
}

/// Parameters from `config` (strict: unknown keys are rejected) overridden by explicitly given flags.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> CliResult<T> {
    let mut merged = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
            serde_json::from_value::<T>(value.clone())
                .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            value
        }
        None => Value::Object(Default::default()),
    };
    let Value::Object(map) = &mut merged else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    if let Value::Object(given) = serde_json::to_value(flags)? {
        for (k, v) in given {
            if !v.is_null() {
                map.insert(k, v);
            }
        }
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(e.to_string()))
}

/// Hex SHA-256 of the canonical (key-sorted, compact) JSON form of `config`.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("JSON values serialize");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub command: String,
    pub config_sha256: String,
    pub config: Value,
}

/// Records `files` (names relative to `dir`) in `dir/manifest.json`, keeping earlier entries.
pub fn record(dir: &Path, command: &str, config: &Value, files: &[String]) -> CliResult<()> {
    let path = dir.join("manifest.json");
    let mut manifest: BTreeMap<String, ManifestEntry> = match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| CliError::Compute(format!("existing {} is not a manifest: {e}", path.display())))?,
        Err(_) => BTreeMap::new(),
    };
    let entry = ManifestEntry { command: command.into(), config_sha256: config_hash(config), config: config.clone() };
    for f in files {
        manifest.insert(f.clone(), entry.clone());
    }
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Writes `text` to `out` and records it, or prints it when `out` is `None`.
pub fn emit(out: Option<&PathBuf>, command: &str, config: &Value, text: &str) -> CliResult<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let (dir, name) = split(path)?;
            std::fs::create_dir_all(&dir)?;
            std::fs::write(path, text)?;
            record(&dir, command, config, &[name])
        }
    }
}

pub fn split(path: &Path) -> CliResult<(PathBuf, String)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?
        .to_string();
    if name == "manifest.json" {
        return Err(CliError::Usage("manifest.json is reserved for the run manifest".into()));
    }
    let dir = path.parent().map(Path::to_path_buf).filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| ".".into());
    Ok((dir, name))
}
