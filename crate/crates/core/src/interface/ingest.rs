use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::{annotate_document, BindingPatterns, Gazetteer};
use crate::document::parse_document;
use crate::ontology::Ontology;
use crate::search::{build_index, Index, SearchError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Index(#[from] SearchError),
}

/// A file that could not be turned into a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestFailure {
    pub source: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub indexed: Vec<String>,
    pub failures: Vec<IngestFailure>,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "indexed {} document(s)", self.indexed.len())?;
        for failure in &self.failures {
            writeln!(f, "failed {}: {}", failure.source, failure.message)?;
        }
        Ok(())
    }
}

/// Parses, annotates and indexes `(doc id, LaTeX bytes)` pairs. Documents
/// that fail to parse are reported and skipped.
pub fn ingest_sources(
    sources: Vec<(String, Vec<u8>)>,
    ontology: Arc<Ontology>,
    patterns: &BindingPatterns,
) -> Result<(Index, IngestReport), IngestError> {
    let gazetteer = Gazetteer::new(&ontology);
    let mut report = IngestReport::default();
    let mut corpus = Vec::new();
    for (id, bytes) in sources {
        match parse_document(&bytes, &id) {
            Ok(doc) => {
                let annotations = annotate_document(&doc, &gazetteer, &ontology, patterns);
                report.indexed.push(id);
                corpus.push((doc, annotations));
            }
            Err(e) => report.failures.push(IngestFailure {
                source: id,
                message: e.to_string(),
            }),
        }
    }
    let index = build_index(corpus, ontology)?;
    Ok((index, report))
}

/// `.tex` files directly inside `dir`, sorted by name; the file stem is the
/// document id.
pub fn corpus_files(dir: &Path) -> Result<Vec<(String, PathBuf)>, IngestError> {
    let io = |source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "tex") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                files.push((stem.to_string(), path.clone()));
            }
        }
    }
    files.sort();
    Ok(files)
}

/// Ingests every `.tex` file of a directory.
pub fn ingest_dir(
    dir: &Path,
    ontology: Arc<Ontology>,
    patterns: &BindingPatterns,
) -> Result<(Index, IngestReport), IngestError> {
    let mut sources = Vec::new();
    for (id, path) in corpus_files(dir)? {
        let bytes = std::fs::read(&path).map_err(|source| IngestError::Io { path, source })?;
        sources.push((id, bytes));
    }
    ingest_sources(sources, ontology, patterns)
}
