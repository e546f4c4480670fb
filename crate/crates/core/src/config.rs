//! TOML configuration files.
//!
//! Unknown keys are rejected. Errors name the file, the offending key and
//! its line and column. A relative path that does not exist is looked up
//! again under the directory named by `MSDPOOL_CONFIG_DIR`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::{Error, Result};

pub const CONFIG_DIR_ENV: &str = "MSDPOOL_CONFIG_DIR";

pub fn resolve_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

pub fn parse<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: describe(&e, text),
    })
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let (path, text) = read(path)?;
    parse(&text, &path)
}

fn describe(e: &toml::de::Error, text: &str) -> String {
    let message = e.message().trim_end();
    match e.span() {
        Some(span) => at(text, span.start, message),
        None => message.to_string(),
    }
}

fn at(text: &str, offset: usize, message: &str) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("line {line}, column {column}: {message}")
}

/// A config error located at byte `offset` of `text`.
pub(crate) fn error_at(path: &Path, text: &str, offset: usize, message: &str) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        message: at(text, offset, message),
    }
}

/// Reads a file, looking it up under `MSDPOOL_CONFIG_DIR` as described above.
pub(crate) fn read(path: &Path) -> Result<(PathBuf, String)> {
    let path = resolve_path(path);
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok((path, text))
}
