use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::document::{SegmentRelationKind, SegmentType};

use super::{formula_number, rank, segment_number, Highlight, Hit, Index, IndexedDocument, SearchError, Via};

/// Concepts a target names: the id itself, or every concept with that label.
fn resolve_target(ix: &Index, target: &str) -> Result<BTreeSet<String>, SearchError> {
    if ix.ontology().contains(target) {
        return Ok(BTreeSet::from([target.to_string()]));
    }
    let found = ix.ontology().find_by_label(target, None);
    if found.is_empty() {
        return Err(SearchError::UnresolvedLabel(target.to_string()));
    }
    Ok(found)
}

/// Segment id → concepts from `targets` it is annotated or bound with.
fn matching_segments<'a>(
    ix: &'a Index,
    targets: &'a BTreeSet<String>,
) -> BTreeMap<&'a str, BTreeSet<&'a str>> {
    let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in targets {
        for p in ix.concept_postings(c) {
            out.entry(p.segment_id.as_str()).or_default().insert(c.as_str());
        }
    }
    out
}

/// Spans in the segment text annotated with one of `targets`.
fn target_spans(entry: &IndexedDocument, segment_id: &str, targets: &BTreeSet<String>) -> Vec<Highlight> {
    entry
        .annotations
        .annotations
        .iter()
        .filter(|a| a.segment_id == segment_id && targets.contains(&a.concept_id))
        .map(|a| Highlight::Text {
            start: a.span.start,
            end: a.span.end,
        })
        .collect()
}

fn local(id: &str) -> &str {
    id.rsplit_once('#').map_or(id, |(_, s)| s)
}

/// Segments of type `kind` connected by `via` to a segment about `target`.
///
/// For `proves` the connection runs through a proof P of the segment: P
/// itself is about the target, or P refers to a segment that is. For every
/// other kind an edge `S via X` must reach a segment X about the target.
/// The score counts the distinct pieces of evidence.
pub fn search_segments(
    ix: &Index,
    kind: SegmentType,
    via: SegmentRelationKind,
    target: &str,
) -> Result<Vec<Hit>, SearchError> {
    let targets = resolve_target(ix, target)?;
    let about = matching_segments(ix, &targets);
    let mut hits = Vec::new();
    for sref in ix.segment_postings(kind) {
        let Some(entry) = ix.document(&sref.doc_id) else {
            continue;
        };
        let doc = &entry.doc;
        let mut explain: Vec<String> = Vec::new();
        let describe = |id: &str| about[id].iter().copied().collect::<Vec<_>>().join(", ");
        if via == SegmentRelationKind::Proves {
            for proof in doc
                .relations
                .iter()
                .filter(|r| r.kind == SegmentRelationKind::Proves && r.dst == sref.segment_id)
            {
                let p = proof.src.as_str();
                if about.contains_key(p) {
                    explain.push(format!("{} proves it and mentions {}", local(p), describe(p)));
                }
                for r in doc.relations_from(p, SegmentRelationKind::RefersTo) {
                    if about.contains_key(r.dst.as_str()) {
                        explain.push(format!(
                            "{} proves it and refers to {} about {}",
                            local(p),
                            local(&r.dst),
                            describe(&r.dst)
                        ));
                    }
                }
            }
        } else {
            for r in doc.relations_from(&sref.segment_id, via) {
                if about.contains_key(r.dst.as_str()) {
                    explain.push(format!(
                        "{} {} about {}",
                        via.name(),
                        local(&r.dst),
                        describe(&r.dst)
                    ));
                }
            }
        }
        if explain.is_empty() {
            continue;
        }
        hits.push(Hit {
            doc_id: sref.doc_id.clone(),
            segment_id: sref.segment_id.clone(),
            formula_id: None,
            score: explain.len() as f64,
            highlights: target_spans(entry, &sref.segment_id, &targets),
            explain,
            mathml: None,
        });
    }
    rank(&mut hits);
    Ok(hits)
}

/// Filters of [`aggregate`]; unset fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateCriteria {
    #[serde(rename = "type")]
    pub segment_type: Option<SegmentType>,
    pub area: Option<String>,
    pub object: Option<String>,
}

impl AggregateCriteria {
    pub fn is_empty(&self) -> bool {
        self.segment_type.is_none() && self.area.is_none() && self.object.is_none()
    }
}

/// A segment, or a formula within it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ObjectRef {
    pub doc_id: String,
    pub segment_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula_id: Option<String>,
}

impl ObjectRef {
    fn order_key(&self) -> (&str, usize, Option<usize>) {
        (
            &self.doc_id,
            segment_number(&self.segment_id),
            self.formula_id.as_deref().map(formula_number),
        )
    }
}

/// Objects meeting every given criterion.
///
/// `object` selects the segments annotated with the concept and the formulas
/// bound to it; otherwise `type` selects segments of that type; with only
/// `area`, whole documents are returned as their root segments. `area`
/// keeps documents annotated with the area or a descendant of it.
pub fn aggregate(ix: &Index, criteria: &AggregateCriteria) -> Result<Vec<ObjectRef>, SearchError> {
    if criteria.is_empty() {
        return Err(SearchError::EmptyCriteria);
    }
    let o = ix.ontology();
    for c in criteria.area.iter().chain(&criteria.object) {
        if !o.contains(c) {
            return Err(SearchError::UnknownConcept(c.clone()));
        }
    }
    let area_docs: Option<BTreeSet<&str>> = match &criteria.area {
        Some(area) => {
            let members = o
                .descendants(area)
                .map_err(|_| SearchError::UnknownConcept(area.clone()))?;
            Some(
                ix.documents()
                    .iter()
                    .filter(|d| d.concepts().iter().any(|c| members.contains(*c)))
                    .map(|d| d.doc.id.as_str())
                    .collect(),
            )
        }
        None => None,
    };
    let in_area = |doc: &str| area_docs.as_ref().is_none_or(|docs| docs.contains(doc));
    let of_type = |segment_id: &str| match criteria.segment_type {
        None => true,
        Some(t) => ix.segment(segment_id).is_some_and(|(_, s)| s.segment_type == t),
    };

    let mut out: Vec<ObjectRef> = if let Some(object) = &criteria.object {
        let mut seen = BTreeSet::new();
        ix.concept_postings(object)
            .iter()
            .filter(|p| in_area(&p.doc_id) && of_type(&p.segment_id))
            .map(|p| ObjectRef {
                doc_id: p.doc_id.clone(),
                segment_id: p.segment_id.clone(),
                formula_id: match p.via {
                    Via::Binding => p.formula_id.clone(),
                    Via::Annotation => None,
                },
            })
            .filter(|r| seen.insert(r.clone()))
            .collect()
    } else if let Some(t) = criteria.segment_type {
        ix.segment_postings(t)
            .iter()
            .filter(|s| in_area(&s.doc_id))
            .map(|s| ObjectRef {
                doc_id: s.doc_id.clone(),
                segment_id: s.segment_id.clone(),
                formula_id: None,
            })
            .collect()
    } else {
        ix.documents()
            .iter()
            .filter(|d| in_area(&d.doc.id))
            .map(|d| ObjectRef {
                doc_id: d.doc.id.clone(),
                segment_id: d.doc.root().id.clone(),
                formula_id: None,
            })
            .collect()
    };
    out.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
    Ok(out)
}
