//! Related-document ranking over hierarchy-propagated concept vectors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ConceptKind, Ontology};
use crate::search::{Index, IndexedDocument, SearchError};

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile '{name}': {message}")]
    Invalid { name: String, message: String },
    #[error("unknown profile '{0}'")]
    Unknown(String),
    #[error("profile file: {0}")]
    Format(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Scenario weights for concept vectors and ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub name: String,
    pub kind_weights: BTreeMap<ConceptKind, f64>,
    /// Factor applied per isA step when propagating to ancestors.
    pub hierarchy_decay: f64,
    /// Bonus per unit of area breadth of the candidate.
    pub breadth_bonus: f64,
}

impl Profile {
    pub fn new(name: &str, area: f64, object: f64, decay: f64, bonus: f64) -> Self {
        Profile {
            name: name.to_string(),
            kind_weights: BTreeMap::from([(ConceptKind::Area, area), (ConceptKind::Object, object)]),
            hierarchy_decay: decay,
            breadth_bonus: bonus,
        }
    }

    /// Areas weigh double; no breadth bonus.
    pub fn referee() -> Self {
        Profile::new("referee", 2.0, 1.0, 0.5, 0.0)
    }

    /// Equal kind weights; documents spanning many areas rank higher.
    pub fn novice() -> Self {
        Profile::new("novice", 1.0, 1.0, 0.5, 0.25)
    }

    pub fn builtin() -> Vec<Profile> {
        vec![Profile::referee(), Profile::novice()]
    }

    pub fn weight(&self, kind: ConceptKind) -> f64 {
        self.kind_weights.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let fail = |message: &str| {
            Err(ProfileError::Invalid {
                name: self.name.clone(),
                message: message.to_string(),
            })
        };
        if self.kind_weights.values().any(|w| !w.is_finite() || *w <= 0.0) {
            return fail("kind weights must be positive");
        }
        if self.kind_weights.is_empty() {
            return fail("at least one kind weight is required");
        }
        if !(0.0..1.0).contains(&self.hierarchy_decay) {
            return fail("hierarchy decay must be in [0, 1)");
        }
        if !self.breadth_bonus.is_finite() || self.breadth_bonus < 0.0 {
            return fail("breadth bonus must be non-negative");
        }
        Ok(())
    }
}

/// Profiles by name: the built-in ones, overridden or extended by a file.
#[derive(Debug, Clone)]
pub struct ProfileSet {
    profiles: BTreeMap<String, Profile>,
}

impl Default for ProfileSet {
    fn default() -> Self {
        ProfileSet {
            profiles: Profile::builtin()
                .into_iter()
                .map(|p| (p.name.clone(), p))
                .collect(),
        }
    }
}

impl ProfileSet {
    /// Parses a JSON array of profiles.
    pub fn parse(json: &str) -> Result<Self, ProfileError> {
        let mut set = ProfileSet::default();
        for p in serde_json::from_str::<Vec<Profile>>(json)? {
            p.validate()?;
            set.profiles.insert(p.name.clone(), p);
        }
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, name: &str) -> Result<&Profile, ProfileError> {
        self.profiles
            .get(name)
            .ok_or_else(|| ProfileError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }
}

/// Concept id → non-negative weight.
pub type ConceptVector = BTreeMap<String, f64>;

/// Concept occurrences of a document: annotations, bindings and keywords.
fn occurrences(doc: &IndexedDocument) -> impl Iterator<Item = &str> {
    let a = &doc.annotations;
    a.annotations
        .iter()
        .map(|x| x.concept_id.as_str())
        .chain(a.bindings.iter().map(|b| b.concept_id.as_str()))
        .chain(a.keyword_concepts.iter().map(String::as_str))
}

/// Adds one occurrence of `concept` to `v`, propagated up the hierarchy.
pub fn add_occurrence(v: &mut ConceptVector, concept: &str, o: &Ontology, p: &Profile) {
    let Some(kind) = o.kind_of(concept) else { return };
    let w = p.weight(kind);
    if w <= 0.0 {
        return;
    }
    *v.entry(concept.to_string()).or_default() += w;
    if p.hierarchy_decay == 0.0 {
        return;
    }
    for (ancestor, d) in o.ancestor_distances(concept).unwrap_or_default() {
        *v.entry(ancestor).or_default() += w * p.hierarchy_decay.powi(d as i32);
    }
}

/// Weighted, hierarchy-propagated concept vector of a document.
pub fn doc_concept_vector(doc: &IndexedDocument, o: &Ontology, p: &Profile) -> ConceptVector {
    let mut v = ConceptVector::new();
    for c in occurrences(doc) {
        add_occurrence(&mut v, c, o, p);
    }
    v
}

/// Cosine similarity, 0 when either vector has no mass.
pub fn similarity(a: &ConceptVector, b: &ConceptVector) -> f64 {
    let norm = |v: &ConceptVector| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Areas a document touches through any of its concepts.
pub fn doc_areas(doc: &IndexedDocument, o: &Ontology) -> BTreeSet<String> {
    occurrences(doc).flat_map(|c| o.areas_of(c)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub doc_id: String,
    pub score: f64,
}

/// Top `k` other documents by similarity times `1 + β·breadth`, where
/// breadth is the candidate's share of all areas in the corpus.
pub fn recommend(
    ix: &Index,
    doc_id: &str,
    p: &Profile,
    k: usize,
) -> Result<Vec<Recommendation>, SearchError> {
    let query = ix.require_document(doc_id)?;
    let o = ix.ontology();
    let qv = doc_concept_vector(query, o, p);
    let areas: Vec<BTreeSet<String>> = ix.documents().iter().map(|d| doc_areas(d, o)).collect();
    let corpus_areas = areas.iter().flatten().collect::<BTreeSet<_>>().len();

    let mut out: Vec<Recommendation> = ix
        .documents()
        .iter()
        .zip(&areas)
        .filter(|(d, _)| d.doc.id != doc_id)
        .filter_map(|(d, a)| {
            let sim = similarity(&qv, &doc_concept_vector(d, o, p));
            let breadth = if corpus_areas == 0 {
                0.0
            } else {
                a.len() as f64 / corpus_areas as f64
            };
            let score = sim * (1.0 + p.breadth_bonus * breadth);
            (score > 0.0).then(|| Recommendation {
                doc_id: d.doc.id.clone(),
                score,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    out.truncate(k);
    Ok(out)
}
