//! Maps system keys (`atomicity`, `trace:a,b`, `custom:path`, ...) to
//! effect systems.

use std::path::Path;

use crate::instances::{atomicity, lift, must, pmonad, reentrancy, trace};
use crate::quantale::finite::{finite_system, FiniteQuantale};
use crate::quantale::{EffectError, EffectSystem, TableError};

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown system `{0}` (expected atomicity, reentrancy, trace:<symbols>, must:<events>, pmonad:<states>, lift:<events> or custom:<path>)")]
    Unknown(String),
    #[error("system `{key}` needs a comma-separated list after the colon")]
    MissingList { key: String },
    #[error("system `{key}`: {source}")]
    Table { key: String, source: TableError },
    #[error("system `{key}`: {source}")]
    Effect { key: String, source: EffectError },
}

/// The keys accepted without parameters.
pub const FIXED_KEYS: [&str; 2] = ["atomicity", "reentrancy"];

fn list(key: &str, rest: &str) -> Result<Vec<String>, RegistryError> {
    let items: Vec<String> = rest.split(',').map(|s| s.trim().to_string()).collect();
    if rest.trim().is_empty() {
        return Err(RegistryError::MissingList { key: key.to_string() });
    }
    Ok(items)
}

/// Resolves a system key. `custom:` paths are read from disk.
pub fn lookup(key: &str) -> Result<EffectSystem, RegistryError> {
    let table = |source| RegistryError::Table { key: key.to_string(), source };
    match key {
        "atomicity" => return Ok(atomicity::system()),
        "reentrancy" => return Ok(reentrancy::system()),
        _ => {}
    }
    let Some((kind, rest)) = key.split_once(':') else {
        return Err(RegistryError::Unknown(key.to_string()));
    };
    match kind {
        "trace" => trace::system(&list(key, rest)?)
            .map_err(|source| RegistryError::Effect { key: key.to_string(), source }),
        "must" => must::system(&list(key, rest)?).map_err(table),
        "pmonad" => pmonad::system(&list(key, rest)?).map_err(table),
        "lift" => lift::powerset_lift(&list(key, rest)?).map_err(table),
        "custom" => {
            if rest.is_empty() {
                return Err(RegistryError::MissingList { key: key.to_string() });
            }
            let (q, atoms) = FiniteQuantale::load(Path::new(rest)).map_err(table)?;
            Ok(finite_system(key, q, atoms))
        }
        _ => Err(RegistryError::Unknown(key.to_string())),
    }
}

/// Checks the shape of a key without touching the filesystem.
pub fn validate_key(key: &str) -> Result<(), RegistryError> {
    if FIXED_KEYS.contains(&key) {
        return Ok(());
    }
    match key.split_once(':') {
        Some(("trace" | "must" | "pmonad" | "lift" | "custom", rest)) if !rest.trim().is_empty() => Ok(()),
        Some(("trace" | "must" | "pmonad" | "lift" | "custom", _)) => {
            Err(RegistryError::MissingList { key: key.to_string() })
        }
        _ => Err(RegistryError::Unknown(key.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_keys() {
        for key in ["atomicity", "reentrancy", "trace:a,b", "must:a,b,c", "pmonad:s1,s2", "lift:x,y"] {
            let s = lookup(key).unwrap();
            assert_eq!(s.name(), key);
        }
    }

    #[test]
    fn bad_keys() {
        assert!(matches!(lookup("nope"), Err(RegistryError::Unknown(_))));
        assert!(matches!(lookup("trace:"), Err(RegistryError::MissingList { .. })));
        assert!(matches!(lookup("must:a,a"), Err(RegistryError::Table { .. })));
        assert!(matches!(lookup("custom:/nonexistent/q.json"), Err(RegistryError::Table { .. })));
        assert!(validate_key("foo:bar").is_err());
        assert!(validate_key("custom:/nonexistent/q.json").is_ok());
    }
}
