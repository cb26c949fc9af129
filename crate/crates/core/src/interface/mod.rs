//! Command-line and HTTP front ends over an index snapshot.

pub mod cli;
mod config;
mod error;
pub mod http;
mod ingest;

use std::path::Path;
use std::sync::Arc;

use crate::annotator::BindingPatterns;
use crate::document::{SegmentRelationKind, SegmentType};
use crate::formula::FormulaPattern;
use crate::ontology::{load_ontology_file, Ontology};
use crate::rdf::{document_to_triples, RdfFormat};
use crate::search::{
    search_formula_semantic, search_formula_syntactic, search_segments, Hit, Index, SearchError,
    SemanticQuery,
};

pub use config::{ConfigError, ServiceConfig, DEFAULT_BASE_IRI};
pub use error::ApiError;
pub use ingest::{corpus_files, ingest_dir, ingest_sources, IngestError, IngestFailure, IngestReport};

/// A formula query in either mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaQuery {
    Syntactic(String),
    Semantic(SemanticQuery),
}

pub fn parse_segment_type(name: &str) -> Result<SegmentType, ApiError> {
    SegmentType::parse(name).ok_or_else(|| ApiError::bad_request(format!("unknown segment type '{name}'")))
}

pub fn parse_relation_kind(name: &str) -> Result<SegmentRelationKind, ApiError> {
    SegmentRelationKind::parse(name)
        .ok_or_else(|| ApiError::bad_request(format!("unknown relation '{name}'")))
}

pub fn parse_rdf_format(name: &str) -> Result<RdfFormat, ApiError> {
    RdfFormat::parse(name).ok_or_else(|| ApiError::bad_request(format!("unknown RDF format '{name}'")))
}

/// Splits a comma-separated concept list, dropping blanks.
pub fn split_concepts(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn formula_search(ix: &Index, query: &FormulaQuery) -> Result<Vec<Hit>, ApiError> {
    match query {
        FormulaQuery::Syntactic(source) => {
            let pattern = FormulaPattern::parse(source).map_err(SearchError::from)?;
            Ok(search_formula_syntactic(ix, &pattern))
        }
        FormulaQuery::Semantic(q) => Ok(search_formula_semantic(ix, q)?),
    }
}

pub fn segment_search(ix: &Index, kind: &str, via: &str, target: &str) -> Result<Vec<Hit>, ApiError> {
    Ok(search_segments(
        ix,
        parse_segment_type(kind)?,
        parse_relation_kind(via)?,
        target,
    )?)
}

/// Serialized RDF of one indexed document.
pub fn document_rdf(ix: &Index, doc_id: &str, base: &str, format: RdfFormat) -> Result<Vec<u8>, ApiError> {
    let entry = ix.require_document(doc_id)?;
    let triples = document_to_triples(
        &entry.doc,
        &entry.annotations.annotations,
        &entry.annotations.bindings,
        ix.ontology(),
        base,
    )?;
    Ok(format.serialize(&triples))
}

/// Binding templates from a file, or the built-in ones.
pub fn load_patterns(path: Option<&Path>) -> Result<BindingPatterns, ApiError> {
    match path {
        Some(p) => Ok(BindingPatterns::load(p)?),
        None => Ok(BindingPatterns::default()),
    }
}

/// Loads the ontology and ingests the corpus a config points at.
pub fn build_from_config(config: &ServiceConfig) -> Result<(Index, IngestReport), ApiError> {
    let ontology: Arc<Ontology> = Arc::new(load_ontology_file(&config.ontology)?);
    let patterns = load_patterns(config.patterns.as_deref())?;
    Ok(ingest_dir(&config.corpus_dir, ontology, &patterns)?)
}
