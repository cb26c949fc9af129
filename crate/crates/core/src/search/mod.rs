//! Immutable corpus index and the four query families: syntactic and
//! semantic formula search, segment-relation search and aggregation.

mod formula_search;
mod highlight;
mod segments;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotator::DocumentAnnotations;
use crate::document::{Formula, MathDocument, Segment, SegmentType};
use crate::formula::{normalize_node, subterms, AstNode, Fixity, NodePath, ParseError};
use crate::ontology::{Ontology, OntologyDocument};

pub use formula_search::{search_formula_semantic, search_formula_syntactic, SemanticQuery};
pub use highlight::{highlight, Snippet};
pub use segments::{aggregate, search_segments, AggregateCriteria, ObjectRef};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("duplicate document id '{0}'")]
    DuplicateDocId(String),
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error("label '{0}' does not name any concept")]
    UnresolvedLabel(String),
    #[error("unknown document '{0}'")]
    UnknownDocument(String),
    #[error(transparent)]
    PatternParse(#[from] ParseError),
    #[error("hit refers to '{0}', which is not in the index")]
    StaleHit(String),
    #[error("at least one criterion is required")]
    EmptyCriteria,
    #[error("query needs at least one concept")]
    EmptyQuery,
    #[error("snapshot format error: {0}")]
    Snapshot(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One subterm occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaPosting {
    pub doc_id: String,
    pub segment_id: String,
    pub formula_id: String,
    pub path: NodePath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Annotation,
    Binding,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConceptPosting {
    pub doc_id: String,
    pub segment_id: String,
    pub formula_id: Option<String>,
    pub via: Via,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentRef {
    pub doc_id: String,
    pub segment_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Highlight {
    /// A node of the hit's formula.
    Node { path: NodePath },
    /// Character offsets into the hit segment's text.
    Text { start: usize, end: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Hit {
    pub doc_id: String,
    pub segment_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_id: Option<String>,
    pub score: f64,
    pub highlights: Vec<Highlight>,
    pub explain: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mathml: Option<String>,
}

impl Hit {
    /// Identity of the hit independent of score and explanation.
    pub fn key(&self) -> (String, String, Option<String>) {
        (
            self.doc_id.clone(),
            self.segment_id.clone(),
            self.formula_id.clone(),
        )
    }
}

/// A document with everything the annotator produced for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDocument {
    pub doc: MathDocument,
    #[serde(flatten)]
    pub annotations: DocumentAnnotations,
}

impl IndexedDocument {
    /// Concepts annotated anywhere in the document or named by its keywords.
    pub fn concepts(&self) -> BTreeSet<&str> {
        self.annotations
            .annotations
            .iter()
            .map(|a| a.concept_id.as_str())
            .chain(self.annotations.keyword_concepts.iter().map(String::as_str))
            .collect()
    }
}

/// Position of a formula: document, segment index and formula index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FormulaLocation {
    doc: usize,
    segment: usize,
    formula: usize,
}

/// An immutable snapshot of the corpus with its postings.
#[derive(Debug)]
pub struct Index {
    docs: Vec<IndexedDocument>,
    doc_index: BTreeMap<String, usize>,
    formulas: HashMap<String, FormulaLocation>,
    subterm_postings: Vec<FormulaPosting>,
    formula_postings: HashMap<u64, Vec<usize>>,
    shape_postings: HashMap<String, Vec<usize>>,
    concept_postings: BTreeMap<String, Vec<ConceptPosting>>,
    segment_postings: BTreeMap<SegmentType, Vec<SegmentRef>>,
    ontology: Arc<Ontology>,
    build_stamp: String,
}

/// Root shape of a node: what a pattern with the same root must agree on
/// before matching can succeed. Variables share one shape.
pub(crate) fn shape_of(node: &AstNode) -> String {
    match node {
        AstNode::Identifier { name } if crate::formula::is_variable_name(name) => "i".into(),
        AstNode::Identifier { name } => format!("i:{name}"),
        AstNode::Number { lexeme } => format!("n:{lexeme}"),
        AstNode::Wildcard { .. } => "w".into(),
        AstNode::Operator {
            symbol,
            operands,
            fixity,
        } => {
            let f = match fixity {
                Fixity::Prefix => 'p',
                Fixity::Infix => 'i',
                Fixity::Postfix => 's',
            };
            format!("o{f}{symbol}/{}", operands.len())
        }
        AstNode::Apply { arguments, .. } => format!("a/{}", arguments.len()),
        AstNode::Relation { symbol, .. } => format!("r{symbol}"),
        AstNode::Sequence { items } => format!("q/{}", items.len()),
        AstNode::Sub { .. } => "_".into(),
        AstNode::Sup { .. } => "^".into(),
    }
}

/// Builds the postings for a corpus. Documents are ordered by id.
pub fn build_index(
    corpus: Vec<(MathDocument, DocumentAnnotations)>,
    ontology: Arc<Ontology>,
) -> Result<Index, SearchError> {
    let mut by_id: BTreeMap<String, IndexedDocument> = BTreeMap::new();
    for (doc, annotations) in corpus {
        if by_id.contains_key(&doc.id) {
            return Err(SearchError::DuplicateDocId(doc.id));
        }
        by_id.insert(doc.id.clone(), IndexedDocument { doc, annotations });
    }
    let docs: Vec<IndexedDocument> = by_id.into_values().collect();

    let mut stamp = Sha256::new();
    stamp.update(serde_json::to_vec(&ontology.to_document())?);
    for d in &docs {
        stamp.update(serde_json::to_vec(d)?);
    }
    let build_stamp = stamp.finalize()[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    });

    let mut index = Index {
        doc_index: docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc.id.clone(), i))
            .collect(),
        docs,
        formulas: HashMap::new(),
        subterm_postings: Vec::new(),
        formula_postings: HashMap::new(),
        shape_postings: HashMap::new(),
        concept_postings: BTreeMap::new(),
        segment_postings: BTreeMap::new(),
        ontology,
        build_stamp,
    };
    index.fill_postings();
    Ok(index)
}

impl Index {
    fn fill_postings(&mut self) {
        for (d, entry) in self.docs.iter().enumerate() {
            let doc = &entry.doc;
            for (s, segment) in doc.segments.iter().enumerate() {
                self.segment_postings
                    .entry(segment.segment_type)
                    .or_default()
                    .push(SegmentRef {
                        doc_id: doc.id.clone(),
                        segment_id: segment.id.clone(),
                    });
                for (f, formula) in segment.formulas.iter().enumerate() {
                    self.formulas.insert(
                        formula.id.clone(),
                        FormulaLocation {
                            doc: d,
                            segment: s,
                            formula: f,
                        },
                    );
                    let Some(ast) = &formula.ast else { continue };
                    for (path, node) in subterms(ast) {
                        let slot = self.subterm_postings.len();
                        self.subterm_postings.push(FormulaPosting {
                            doc_id: doc.id.clone(),
                            segment_id: segment.id.clone(),
                            formula_id: formula.id.clone(),
                            path,
                        });
                        self.formula_postings
                            .entry(normalize_node(node).digest())
                            .or_default()
                            .push(slot);
                        self.shape_postings.entry(shape_of(node)).or_default().push(slot);
                    }
                }
            }

            let mut concept_entries: BTreeSet<(String, ConceptPosting)> = BTreeSet::new();
            for a in &entry.annotations.annotations {
                concept_entries.insert((
                    a.concept_id.clone(),
                    ConceptPosting {
                        doc_id: doc.id.clone(),
                        segment_id: a.segment_id.clone(),
                        formula_id: None,
                        via: Via::Annotation,
                    },
                ));
            }
            for b in &entry.annotations.bindings {
                concept_entries.insert((
                    b.concept_id.clone(),
                    ConceptPosting {
                        doc_id: doc.id.clone(),
                        segment_id: b.segment_id.clone(),
                        formula_id: Some(b.formula_id.clone()),
                        via: Via::Binding,
                    },
                ));
            }
            let mut ordered: Vec<(String, ConceptPosting)> = concept_entries.into_iter().collect();
            ordered.sort_by_key(|(c, p)| {
                (
                    c.clone(),
                    segment_number(&p.segment_id),
                    p.formula_id.as_deref().map(formula_number),
                    p.via,
                )
            });
            for (concept, posting) in ordered {
                self.concept_postings.entry(concept).or_default().push(posting);
            }
        }
    }

    pub fn build_stamp(&self) -> &str {
        &self.build_stamp
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn ontology_arc(&self) -> Arc<Ontology> {
        Arc::clone(&self.ontology)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Documents in id order.
    pub fn documents(&self) -> &[IndexedDocument] {
        &self.docs
    }

    pub fn document(&self, id: &str) -> Option<&IndexedDocument> {
        self.doc_index.get(id).map(|&i| &self.docs[i])
    }

    pub fn require_document(&self, id: &str) -> Result<&IndexedDocument, SearchError> {
        self.document(id)
            .ok_or_else(|| SearchError::UnknownDocument(id.to_string()))
    }

    pub fn segment(&self, segment_id: &str) -> Option<(&IndexedDocument, &Segment)> {
        let doc_id = segment_id.rsplit_once('#')?.0;
        let entry = self.document(doc_id)?;
        entry.doc.segment(segment_id).map(|s| (entry, s))
    }

    pub fn formula(&self, formula_id: &str) -> Option<(&IndexedDocument, &Segment, &Formula)> {
        let loc = self.formulas.get(formula_id)?;
        let entry = &self.docs[loc.doc];
        let segment = &entry.doc.segments[loc.segment];
        Some((entry, segment, &segment.formulas[loc.formula]))
    }

    /// Every indexed subterm, in (doc id, segment order, formula order,
    /// pre-order) order.
    pub fn subterm_postings(&self) -> &[FormulaPosting] {
        &self.subterm_postings
    }

    /// Subterms whose canonical skeleton has the given digest.
    pub fn formula_postings(&self, digest: u64) -> Vec<&FormulaPosting> {
        self.formula_postings
            .get(&digest)
            .into_iter()
            .flatten()
            .map(|&i| &self.subterm_postings[i])
            .collect()
    }

    pub fn formula_posting_keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.formula_postings.keys().copied()
    }

    pub(crate) fn shape_postings(&self, shape: &str) -> Vec<&FormulaPosting> {
        self.shape_postings
            .get(shape)
            .into_iter()
            .flatten()
            .map(|&i| &self.subterm_postings[i])
            .collect()
    }

    pub fn concept_postings(&self, concept: &str) -> &[ConceptPosting] {
        self.concept_postings
            .get(concept)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn segment_postings(&self, kind: SegmentType) -> &[SegmentRef] {
        self.segment_postings.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Node at `path` of the formula a posting refers to.
    pub fn posting_node(&self, posting: &FormulaPosting) -> Option<&AstNode> {
        let (_, _, formula) = self.formula(&posting.formula_id)?;
        formula.ast.as_ref()?.root.at(&posting.path)
    }

    pub fn to_snapshot(&self) -> Snapshot {
        Snapshot {
            build_stamp: self.build_stamp.clone(),
            ontology: self.ontology.to_document(),
            documents: self.docs.clone(),
        }
    }

    /// Writes the snapshot as JSON.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SearchError> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), &self.to_snapshot())?;
        Ok(())
    }

    /// Reads a snapshot written by [`Index::save`] and rebuilds the postings.
    pub fn load(path: impl AsRef<Path>) -> Result<Index, SearchError> {
        let file = std::fs::File::open(path)?;
        let snapshot: Snapshot = serde_json::from_reader(std::io::BufReader::new(file))?;
        snapshot.into_index()
    }
}

/// Serialized form of an index: ontology plus annotated documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    pub build_stamp: String,
    pub ontology: OntologyDocument,
    pub documents: Vec<IndexedDocument>,
}

impl Snapshot {
    pub fn into_index(self) -> Result<Index, SearchError> {
        let ontology = Arc::new(Ontology::from_document(self.ontology));
        build_index(
            self.documents
                .into_iter()
                .map(|d| (d.doc, d.annotations))
                .collect(),
            ontology,
        )
    }
}

pub(crate) fn segment_number(id: &str) -> usize {
    id.rsplit_once("#s")
        .and_then(|(_, n)| n.parse().ok())
        .unwrap_or(0)
}

pub(crate) fn formula_number(id: &str) -> usize {
    id.rsplit_once("#f")
        .and_then(|(_, n)| n.parse().ok())
        .unwrap_or(0)
}

/// Orders hits by descending score, then doc id, segment order and formula
/// order.
pub(crate) fn rank(hits: &mut [Hit]) {
    hits.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
            .then_with(|| segment_number(&a.segment_id).cmp(&segment_number(&b.segment_id)))
            .then_with(|| {
                a.formula_id
                    .as_deref()
                    .map(formula_number)
                    .cmp(&b.formula_id.as_deref().map(formula_number))
            })
    });
}
