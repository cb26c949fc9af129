use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::is_valid_iri;

pub const DEFAULT_BASE_IRI: &str = "https://w3id.org/mathkb/data";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config format error: {0}")]
    Format(#[from] serde_json::Error),
    #[error("{field} path {path} does not exist")]
    MissingPath { field: &'static str, path: PathBuf },
    #[error("port must be in 1..=65535")]
    InvalidPort,
    #[error("invalid listen address '{0}'")]
    InvalidAddress(String),
    #[error("base IRI '{0}' is not absolute")]
    InvalidBase(String),
}

fn default_base_iri() -> String {
    DEFAULT_BASE_IRI.to_string()
}

fn default_host() -> String {
    "127.0.0.1".to_string()
}

/// Service settings. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ServiceConfig {
    pub corpus_dir: PathBuf,
    pub ontology: PathBuf,
    #[serde(default = "default_base_iri")]
    pub base_iri: String,
    #[serde(default = "default_host")]
    pub host: String,
    pub port: u16,
    #[serde(default)]
    pub profiles: Option<PathBuf>,
    #[serde(default)]
    pub patterns: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(corpus_dir: impl Into<PathBuf>, ontology: impl Into<PathBuf>, port: u16) -> Self {
        ServiceConfig {
            corpus_dir: corpus_dir.into(),
            ontology: ontology.into(),
            base_iri: default_base_iri(),
            host: default_host(),
            port,
            profiles: None,
            patterns: None,
        }
    }

    /// Reads, resolves and validates a JSON config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: ServiceConfig = serde_json::from_str(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        config.resolve(dir);
        config.validate()?;
        Ok(config)
    }

    fn resolve(&mut self, dir: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        join(&mut self.corpus_dir);
        join(&mut self.ontology);
        self.profiles.iter_mut().for_each(join);
        self.patterns.iter_mut().for_each(join);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let paths = [
            ("corpusDir", Some(&self.corpus_dir)),
            ("ontology", Some(&self.ontology)),
            ("profiles", self.profiles.as_ref()),
            ("patterns", self.patterns.as_ref()),
        ];
        for (field, path) in paths {
            if let Some(path) = path.filter(|p| !p.exists()) {
                return Err(ConfigError::MissingPath {
                    field,
                    path: path.clone(),
                });
            }
        }
        if self.port == 0 {
            return Err(ConfigError::InvalidPort);
        }
        if !is_valid_iri(&self.base_iri) {
            return Err(ConfigError::InvalidBase(self.base_iri.clone()));
        }
        self.listen_addr().map(|_| ())
    }

    pub fn listen_addr(&self) -> Result<SocketAddr, ConfigError> {
        format!("{}:{}", self.host, self.port)
            .parse()
            .map_err(|_| ConfigError::InvalidAddress(self.host.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("corpus")).unwrap();
        std::fs::write(dir.path().join("o.json"), "{}").unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(&path, r#"{"corpusDir":"corpus","ontology":"o.json","port":8080}"#).unwrap();
        let config = ServiceConfig::load(&path).unwrap();
        assert_eq!(config.corpus_dir, dir.path().join("corpus"));
        assert_eq!(config.listen_addr().unwrap().port(), 8080);
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("service.json");
        std::fs::write(&path, r#"{"corpusDir":"nope","ontology":"o.json","port":1}"#).unwrap();
        assert!(matches!(
            ServiceConfig::load(&path),
            Err(ConfigError::MissingPath { .. })
        ));
        std::fs::write(&path, r#"{"corpusDir":".","ontology":".","port":0}"#).unwrap();
        assert!(matches!(
            ServiceConfig::load(&path),
            Err(ConfigError::InvalidPort)
        ));
        std::fs::write(&path, r#"{"corpusDir":".","ontology":".","port":70000}"#).unwrap();
        assert!(matches!(ServiceConfig::load(&path), Err(ConfigError::Format(_))));
        std::fs::write(&path, r#"{"corpusDir":".","ontology":".","port":1,"extra":1}"#).unwrap();
        assert!(matches!(ServiceConfig::load(&path), Err(ConfigError::Format(_))));
    }
}
