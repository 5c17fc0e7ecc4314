use std::path::Path;

use mec_morl_core::config::CONFIG_KEYS;
use mec_morl_core::SystemConfig;
use sha2::{Digest, Sha256};

use crate::{Failure, Result};

pub const ENV_PREFIX: &str = "MECMORL_";

/// Parse `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Usage(format!("line {}: expected key = value, got {raw:?}", n + 1)));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn apply_pairs(cfg: &mut SystemConfig, pairs: &[(String, String)], origin: &str) -> Result<()> {
    for (k, v) in pairs {
        cfg.set(k, v)
            .map_err(|e| Failure::Usage(format!("{origin}: {e}")))?;
    }
    Ok(())
}

/// Config overrides from `MECMORL_<KEY>` variables. A prefixed variable
/// naming no config key is an error.
pub fn env_pairs<I: IntoIterator<Item = (String, String)>>(vars: I) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (name, value) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else {
            continue;
        };
        let key = rest.to_ascii_lowercase();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Failure::Usage(format!("environment variable {name} names no config key")));
        }
        out.push((key, value));
    }
    out.sort();
    Ok(out)
}

/// `base`, then the file (if any), then environment overrides; validated.
pub fn load(
    base: SystemConfig,
    file: Option<&Path>,
    vars: impl IntoIterator<Item = (String, String)>,
) -> Result<SystemConfig> {
    let mut cfg = base;
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        apply_pairs(&mut cfg, &parse_pairs(&text)?, &path.display().to_string())?;
    }
    apply_pairs(&mut cfg, &env_pairs(vars)?, "environment")?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical text of a config, one `key = value` per line.
pub fn render(cfg: &SystemConfig) -> String {
    cfg.to_pairs()
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// Hex SHA-256 of the canonical text.
pub fn config_hash(cfg: &SystemConfig) -> String {
    hex::encode(Sha256::digest(render(cfg).as_bytes()))
}
