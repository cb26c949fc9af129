//! Ontology term extraction, disambiguation and symbol binding.

mod binding;
mod gazetteer;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::document::{MathDocument, Segment};
use crate::ontology::{Lang, Ontology};

pub use binding::{bind_variables, BindingPatterns, PatternConfigError, DEFAULT_PATTERNS};
pub use gazetteer::Gazetteer;

/// An occurrence of an ontology label in segment text.
///
/// When the matched label belongs to several concepts, `candidates` lists
/// all of them (sorted) and `concept_id` is the first; `ambiguous` stays set
/// until [`link_concepts`] narrows the list to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Annotation {
    pub segment_id: String,
    /// Character offsets into the segment text.
    pub span: Range<usize>,
    pub surface: String,
    pub concept_id: String,
    pub lang: Lang,
    #[serde(default)]
    pub candidates: Vec<String>,
    #[serde(default)]
    pub ambiguous: bool,
}

/// A formula symbol bound to the concept its defining phrase names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VariableBinding {
    pub segment_id: String,
    pub formula_id: String,
    pub symbol: String,
    pub concept_id: String,
    /// Character offsets of the defining phrase in the segment text.
    pub evidence: Range<usize>,
}

/// Annotations and bindings of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentAnnotations {
    pub annotations: Vec<Annotation>,
    pub bindings: Vec<VariableBinding>,
    /// Concepts named by the metadata keywords.
    #[serde(default)]
    pub keyword_concepts: Vec<String>,
}

/// Longest-match gazetteer annotation of one segment.
pub fn extract_terms(segment: &Segment, o: &Ontology) -> Vec<Annotation> {
    Gazetteer::new(o).extract(segment)
}

/// Narrows ambiguous annotations to the candidates that share an area with
/// the majority area of the unambiguous annotations in the same list.
/// Ambiguity that the area evidence cannot settle is kept and flagged.
pub fn link_concepts(annotations: Vec<Annotation>, o: &Ontology) -> Vec<Annotation> {
    let mut votes: BTreeMap<String, usize> = BTreeMap::new();
    for a in annotations.iter().filter(|a| a.candidates.len() <= 1) {
        for area in o.areas_of(&a.concept_id) {
            *votes.entry(area).or_default() += 1;
        }
    }
    let top = votes.values().copied().max().unwrap_or(0);
    let majority: BTreeSet<&str> = votes
        .iter()
        .filter(|(_, &n)| n == top && n > 0)
        .map(|(area, _)| area.as_str())
        .collect();

    annotations
        .into_iter()
        .map(|mut a| {
            if a.candidates.len() <= 1 {
                a.ambiguous = false;
                return a;
            }
            let kept: Vec<String> = a
                .candidates
                .iter()
                .filter(|c| o.areas_of(c).iter().any(|area| majority.contains(area.as_str())))
                .cloned()
                .collect();
            if !kept.is_empty() {
                a.candidates = kept;
            }
            a.concept_id = a.candidates[0].clone();
            a.ambiguous = a.candidates.len() > 1;
            a
        })
        .collect()
}

/// Concepts of the keywords that match a label exactly. Keywords naming
/// several concepts are settled like ambiguous annotations, against the
/// document's own annotations; unresolved ones contribute nothing.
pub fn keyword_concepts(keywords: &[String], annotations: &[Annotation], o: &Ontology) -> Vec<String> {
    let pseudo: Vec<Annotation> = keywords
        .iter()
        .filter_map(|k| {
            let candidates: Vec<String> = o.find_by_label(k, None).into_iter().collect();
            (!candidates.is_empty()).then(|| Annotation {
                segment_id: String::new(),
                span: 0..0,
                surface: k.clone(),
                concept_id: candidates[0].clone(),
                lang: Lang::En,
                ambiguous: candidates.len() > 1,
                candidates,
            })
        })
        .collect();
    let count = pseudo.len();
    let mut all: Vec<Annotation> = annotations.to_vec();
    all.extend(pseudo);
    let linked = link_concepts(all, o);
    let mut out: Vec<String> = Vec::new();
    for a in &linked[linked.len() - count..] {
        if !a.ambiguous && !out.contains(&a.concept_id) {
            out.push(a.concept_id.clone());
        }
    }
    out
}

/// Full pipeline for one document: extraction per segment, document-wide
/// disambiguation, then segment-scoped binding.
pub fn annotate_document(
    doc: &MathDocument,
    gazetteer: &Gazetteer,
    o: &Ontology,
    patterns: &BindingPatterns,
) -> DocumentAnnotations {
    let extracted = doc.segments.iter().flat_map(|s| gazetteer.extract(s)).collect();
    let annotations = link_concepts(extracted, o);
    let bindings = doc
        .segments
        .iter()
        .flat_map(|s| {
            let own: Vec<Annotation> = annotations
                .iter()
                .filter(|a| a.segment_id == s.id)
                .cloned()
                .collect();
            bind_variables(s, &own, patterns)
        })
        .collect();
    let keyword_concepts = keyword_concepts(&doc.metadata.keywords, &annotations, o);
    DocumentAnnotations {
        annotations,
        bindings,
        keyword_concepts,
    }
}
