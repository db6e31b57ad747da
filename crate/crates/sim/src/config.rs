//! Loading experiment configs from JSON.

use std::fs;
use std::path::Path;

use pom_core::config::SimConfig;

use crate::error::{Result, RunError};

/// Parses and validates a config document. Errors carry the JSON path of
/// the offending field.
pub fn parse_config(text: &str, origin: &Path) -> Result<SimConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        RunError::Config {
            path: origin.to_path_buf(),
            message: if at == "." {
                e.into_inner().to_string()
            } else {
                format!("{at}: {}", e.into_inner())
            },
        }
    })?;
    let issues = config.issues();
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(ToString::to_string).collect();
        return Err(RunError::Config {
            path: origin.to_path_buf(),
            message: lines.join("; "),
        });
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text, path)
}
