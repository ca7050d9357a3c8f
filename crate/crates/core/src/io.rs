//! JSON artifacts: every result is wrapped with the configuration that
//! produced it, a digest of that configuration and the library version.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact<T> {
    pub command: String,
    pub version: &'static str,
    /// SHA-256 of the compact JSON of `config` (keys sorted).
    pub config_digest: String,
    pub config: Value,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(command: &str, config: &impl Serialize, result: T) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?;
        Ok(Artifact {
            command: command.into(),
            version: VERSION,
            config_digest: config_digest(&config),
            config,
            result,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }
}

/// Hex SHA-256 of the compact serialization. Object keys are emitted in
/// sorted order, so equal configurations hash equally.
pub fn config_digest(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("JSON values serialize");
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, to_json(value)?).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn digest_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"seed": 7, "eta": 64}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"eta": 64, "seed": 7}"#).unwrap();
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_ne!(
            config_digest(&a),
            config_digest(&json!({"seed": 8, "eta": 64}))
        );
        assert_eq!(config_digest(&a).len(), 64);
    }

    #[test]
    fn artifact_carries_version_and_digest() {
        let art = Artifact::new("towers", &json!({"n": 6}), 1).unwrap();
        assert_eq!(art.version, VERSION);
        assert_eq!(art.config_digest, config_digest(&json!({"n": 6})));
        assert!(art.to_json().unwrap().ends_with("}\n"));
    }

    #[test]
    fn round_trip_through_a_file() {
        let dir = std::env::temp_dir().join(format!("iet-skew-io-{}", std::process::id()));
        let path = dir.join("v.json");
        write_json(&path, &json!({"a": [1, 2]})).unwrap();
        let back: Value = read_json(&path).unwrap();
        assert_eq!(back, json!({"a": [1, 2]}));
        fs::remove_dir_all(dir).unwrap();
        assert!(matches!(read_json::<Value>(&path), Err(Error::Io(_))));
    }
}
