//! Concept graph with two taxonomies (areas of mathematics and mathematical
//! objects), five relation kinds and bilingual labels.

mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use validate::{is_valid_iri, validate, ValidationIssue, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    En,
    Ru,
}

impl Lang {
    pub const ALL: [Lang; 2] = [Lang::En, Lang::Ru];

    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::Ru => "ru",
        }
    }

    pub fn from_code(code: &str) -> Option<Lang> {
        match code {
            "en" => Some(Lang::En),
            "ru" => Some(Lang::Ru),
            _ => None,
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConceptKind {
    Area,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    #[serde(rename = "isA")]
    IsA,
    #[serde(rename = "definedBy")]
    DefinedBy,
    #[serde(rename = "seeAlso")]
    SeeAlso,
    #[serde(rename = "belongsTo")]
    BelongsTo,
    #[serde(rename = "solvedBy")]
    SolvedBy,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] = [
        RelationKind::IsA,
        RelationKind::DefinedBy,
        RelationKind::SeeAlso,
        RelationKind::BelongsTo,
        RelationKind::SolvedBy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::IsA => "isA",
            RelationKind::DefinedBy => "definedBy",
            RelationKind::SeeAlso => "seeAlso",
            RelationKind::BelongsTo => "belongsTo",
            RelationKind::SolvedBy => "solvedBy",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub kind: ConceptKind,
    #[serde(default)]
    pub labels: BTreeMap<Lang, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub definitions: BTreeMap<Lang, String>,
    #[serde(default, rename = "links", skip_serializing_if = "Vec::is_empty")]
    pub external_links: Vec<String>,
}

impl Concept {
    pub fn labels_in(&self, lang: Lang) -> &[String] {
        self.labels.get(&lang).map(Vec::as_slice).unwrap_or(&[])
    }

    /// First English label, falling back to any label, then the id.
    pub fn preferred_label(&self) -> &str {
        self.labels_in(Lang::En)
            .first()
            .or_else(|| self.labels.values().flatten().next())
            .map(String::as_str)
            .unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationEdge {
    pub src: String,
    pub kind: RelationKind,
    pub dst: String,
}

/// On-disk layout of an ontology file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OntologyDocument {
    #[serde(default)]
    pub concepts: Vec<Concept>,
    #[serde(default)]
    pub relations: Vec<RelationEdge>,
}

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("format error at line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error("unknown concept '{0}'")]
    UnknownConcept(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lower-cased, whitespace-collapsed form used for label lookup.
pub fn fold_label(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

/// An indexed, immutable concept graph.
///
/// Built leniently by [`Ontology::from_document`] (duplicates and dangling
/// edges are kept for [`validate`] to report) or strictly by
/// [`load_ontology`].
#[derive(Debug, Clone)]
pub struct Ontology {
    concepts: Vec<Concept>,
    by_id: BTreeMap<String, usize>,
    edges: Vec<RelationEdge>,
    label_index: HashMap<(Lang, String), BTreeSet<String>>,
    parents: HashMap<String, BTreeSet<String>>,
    children: HashMap<String, BTreeSet<String>>,
    outgoing: HashMap<(String, RelationKind), BTreeSet<String>>,
}

impl Ontology {
    pub fn empty() -> Self {
        Self::from_document(OntologyDocument::default())
    }

    pub fn from_document(doc: OntologyDocument) -> Self {
        let mut by_id = BTreeMap::new();
        let mut label_index: HashMap<(Lang, String), BTreeSet<String>> = HashMap::new();
        for (i, concept) in doc.concepts.iter().enumerate() {
            by_id.entry(concept.id.clone()).or_insert(i);
            for (lang, labels) in &concept.labels {
                for label in labels {
                    let folded = fold_label(label);
                    if !folded.is_empty() {
                        label_index
                            .entry((*lang, folded))
                            .or_default()
                            .insert(concept.id.clone());
                    }
                }
            }
        }
        let mut parents: HashMap<String, BTreeSet<String>> = HashMap::new();
        let mut children: HashMap<String, BTreeSet<String>> = HashMap::new();
        let mut outgoing: HashMap<(String, RelationKind), BTreeSet<String>> = HashMap::new();
        for edge in &doc.relations {
            outgoing
                .entry((edge.src.clone(), edge.kind))
                .or_default()
                .insert(edge.dst.clone());
            if edge.kind == RelationKind::IsA {
                parents
                    .entry(edge.src.clone())
                    .or_default()
                    .insert(edge.dst.clone());
                children
                    .entry(edge.dst.clone())
                    .or_default()
                    .insert(edge.src.clone());
            }
        }
        Ontology {
            concepts: doc.concepts,
            by_id,
            edges: doc.relations,
            label_index,
            parents,
            children,
            outgoing,
        }
    }

    pub fn to_document(&self) -> OntologyDocument {
        OntologyDocument {
            concepts: self.concepts.clone(),
            relations: self.edges.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("ontology serializes")
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.by_id.get(id).map(|&i| &self.concepts[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn require(&self, id: &str) -> Result<&Concept, OntologyError> {
        self.concept(id)
            .ok_or_else(|| OntologyError::UnknownConcept(id.to_string()))
    }

    /// Every concept record, including duplicates of a lenient build.
    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept_ids(&self) -> impl Iterator<Item = &str> {
        self.by_id.keys().map(String::as_str)
    }

    pub fn edges(&self) -> &[RelationEdge] {
        &self.edges
    }

    pub fn kind_of(&self, id: &str) -> Option<ConceptKind> {
        self.concept(id).map(|c| c.kind)
    }

    /// Reflexive-transitive closure of inverse isA within the concept's kind.
    pub fn descendants(&self, id: &str) -> Result<BTreeSet<String>, OntologyError> {
        self.closure(id, &self.children)
    }

    /// Reflexive-transitive closure of isA within the concept's kind.
    pub fn ancestors(&self, id: &str) -> Result<BTreeSet<String>, OntologyError> {
        self.closure(id, &self.parents)
    }

    fn closure(
        &self,
        id: &str,
        step: &HashMap<String, BTreeSet<String>>,
    ) -> Result<BTreeSet<String>, OntologyError> {
        let kind = self.require(id)?.kind;
        let mut seen = BTreeSet::from([id.to_string()]);
        let mut queue = VecDeque::from([id.to_string()]);
        while let Some(current) = queue.pop_front() {
            for next in step.get(&current).into_iter().flatten() {
                if self.kind_of(next) == Some(kind) && seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(seen)
    }

    /// Ancestors (excluding the concept) with their shortest isA distance.
    pub fn ancestor_distances(&self, id: &str) -> Result<BTreeMap<String, u32>, OntologyError> {
        let kind = self.require(id)?.kind;
        let mut dist = BTreeMap::new();
        let mut queue = VecDeque::from([(id.to_string(), 0u32)]);
        let mut seen = BTreeSet::from([id.to_string()]);
        while let Some((current, d)) = queue.pop_front() {
            for parent in self.parents.get(&current).into_iter().flatten() {
                if self.kind_of(parent) == Some(kind) && seen.insert(parent.clone()) {
                    dist.insert(parent.clone(), d + 1);
                    queue.push_back((parent.clone(), d + 1));
                }
            }
        }
        Ok(dist)
    }

    pub fn direct_parents(&self, id: &str) -> BTreeSet<String> {
        self.parents.get(id).cloned().unwrap_or_default()
    }

    /// Case-folded exact label match; `lang = None` searches both languages.
    pub fn find_by_label(&self, text: &str, lang: Option<Lang>) -> BTreeSet<String> {
        let folded = fold_label(text);
        let langs: &[Lang] = match lang {
            Some(Lang::En) => &[Lang::En],
            Some(Lang::Ru) => &[Lang::Ru],
            None => &Lang::ALL,
        };
        langs
            .iter()
            .filter_map(|l| self.label_index.get(&(*l, folded.clone())))
            .flatten()
            .cloned()
            .collect()
    }

    /// Labels starting with `prefix` (case-folded), shortest first, then by
    /// label and id.
    pub fn suggest(&self, prefix: &str, lang: Option<Lang>, limit: usize) -> Vec<Suggestion> {
        let folded = fold_label(prefix);
        let mut out: Vec<Suggestion> = Vec::new();
        for concept in &self.concepts {
            for (l, labels) in &concept.labels {
                if lang.is_some_and(|want| want != *l) {
                    continue;
                }
                for label in labels {
                    if fold_label(label).starts_with(&folded) {
                        out.push(Suggestion {
                            id: concept.id.clone(),
                            label: label.clone(),
                            lang: *l,
                            kind: concept.kind,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            (a.label.chars().count(), fold_label(&a.label), &a.id).cmp(&(
                b.label.chars().count(),
                fold_label(&b.label),
                &b.id,
            ))
        });
        out.dedup_by(|a, b| a.id == b.id && a.label == b.label);
        out.truncate(limit);
        out
    }

    pub fn relations_of(&self, id: &str, kind: RelationKind) -> Result<BTreeSet<String>, OntologyError> {
        self.require(id)?;
        Ok(self
            .outgoing
            .get(&(id.to_string(), kind))
            .cloned()
            .unwrap_or_default())
    }

    /// Areas an object belongs to, directly or through its isA ancestors.
    pub fn areas_of(&self, id: &str) -> BTreeSet<String> {
        let Some(concept) = self.concept(id) else {
            return BTreeSet::new();
        };
        if concept.kind == ConceptKind::Area {
            return BTreeSet::from([id.to_string()]);
        }
        let mut areas = BTreeSet::new();
        for ancestor in self.ancestors(id).unwrap_or_default() {
            if let Some(dsts) = self.outgoing.get(&(ancestor, RelationKind::BelongsTo)) {
                areas.extend(dsts.iter().cloned());
            }
        }
        areas
    }

    /// Every (language, label) pair of the ontology, used to build gazetteers.
    pub fn labels(&self) -> impl Iterator<Item = (&str, Lang, &str)> {
        self.by_id.values().flat_map(move |&i| {
            let concept = &self.concepts[i];
            concept.labels.iter().flat_map(move |(lang, labels)| {
                labels
                    .iter()
                    .map(move |label| (concept.id.as_str(), *lang, label.as_str()))
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: String,
    pub label: String,
    pub lang: Lang,
    pub kind: ConceptKind,
}

pub fn parse_ontology_document(source: impl Read) -> Result<OntologyDocument, OntologyError> {
    serde_json::from_reader(source).map_err(|e| OntologyError::Format {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads and indexes an ontology file, rejecting duplicate ids and edges
/// whose endpoints do not exist. Nothing is returned on failure.
pub fn load_ontology(source: impl Read) -> Result<Ontology, OntologyError> {
    let doc = parse_ontology_document(source)?;
    let mut seen = BTreeSet::new();
    for concept in &doc.concepts {
        if !seen.insert(concept.id.as_str()) {
            return Err(OntologyError::Integrity(format!(
                "duplicate concept id '{}'",
                concept.id
            )));
        }
    }
    for edge in &doc.relations {
        for endpoint in [&edge.src, &edge.dst] {
            if !seen.contains(endpoint.as_str()) {
                return Err(OntologyError::Integrity(format!(
                    "edge {} {} {} references unknown concept '{}'",
                    edge.src, edge.kind, edge.dst, endpoint
                )));
            }
        }
    }
    Ok(Ontology::from_document(doc))
}

pub fn load_ontology_file(path: impl AsRef<std::path::Path>) -> Result<Ontology, OntologyError> {
    let file = std::fs::File::open(path)?;
    load_ontology(std::io::BufReader::new(file))
}
