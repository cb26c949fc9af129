use std::collections::{BTreeSet, HashMap, HashSet};

use crate::document::SegmentType;
use crate::formula::{
    match_at, normalize_node, subterms_of, to_mathml_marked, AstNode, FormulaPattern, NodePath,
};

use super::{rank, shape_of, FormulaPosting, Highlight, Hit, Index, SearchError, Via};

/// Every formula subterm that `pattern` matches, one hit per formula.
///
/// Patterns without wildcards are looked up by canonical digest; others by
/// the shape of their root. Every candidate is confirmed with `match_at`.
pub fn search_formula_syntactic(ix: &Index, pattern: &FormulaPattern) -> Vec<Hit> {
    let candidates: Vec<&FormulaPosting> = match &pattern.root {
        AstNode::Wildcard { .. } => ix.subterm_postings().iter().collect(),
        root if !pattern.has_wildcards() => ix.formula_postings(normalize_node(root).digest()),
        root => ix.shape_postings(&shape_of(root)),
    };

    // formula id → matched paths, in posting order
    let mut matched: Vec<(&FormulaPosting, Vec<NodePath>)> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for posting in candidates {
        let Some(node) = ix.posting_node(posting) else {
            continue;
        };
        if match_at(&pattern.root, node).is_none() {
            continue;
        }
        match slot.get(posting.formula_id.as_str()) {
            Some(&i) => matched[i].1.push(posting.path.clone()),
            None => {
                slot.insert(&posting.formula_id, matched.len());
                matched.push((posting, vec![posting.path.clone()]));
            }
        }
    }

    let mut per_doc: HashMap<&str, usize> = HashMap::new();
    for (posting, paths) in &matched {
        *per_doc.entry(posting.doc_id.as_str()).or_default() += paths.len();
    }

    let mut hits: Vec<Hit> = matched
        .into_iter()
        .map(|(posting, mut paths)| {
            paths.sort();
            let mathml = ix
                .formula(&posting.formula_id)
                .and_then(|(_, _, f)| f.ast.as_ref())
                .map(|ast| to_mathml_marked(&ast.root, &paths));
            Hit {
                doc_id: posting.doc_id.clone(),
                segment_id: posting.segment_id.clone(),
                formula_id: Some(posting.formula_id.clone()),
                score: per_doc[posting.doc_id.as_str()] as f64,
                explain: paths
                    .iter()
                    .map(|p| format!("{} matches at {p}", pattern.source))
                    .collect(),
                highlights: paths.into_iter().map(|path| Highlight::Node { path }).collect(),
                mathml,
            }
        })
        .collect();
    rank(&mut hits);
    hits
}

/// Parameters of a concept query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticQuery {
    pub concepts: BTreeSet<String>,
    pub scope: Option<SegmentType>,
    pub expand: bool,
}

impl SemanticQuery {
    pub fn new<I, S>(concepts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SemanticQuery {
            concepts: concepts.into_iter().map(Into::into).collect(),
            scope: None,
            expand: true,
        }
    }

    pub fn scope(mut self, scope: SegmentType) -> Self {
        self.scope = Some(scope);
        self
    }

    pub fn expand(mut self, expand: bool) -> Self {
        self.expand = expand;
        self
    }
}

const ANNOTATION_WEIGHT: f64 = 0.5;

/// Evidence for one query concept: binding counts per formula and the
/// segments annotated with a member of its expansion.
#[derive(Default)]
struct ConceptEvidence<'a> {
    bindings: HashMap<&'a str, usize>,
    segments: HashSet<&'a str>,
    members: BTreeSet<String>,
}

/// Formulas related to every query concept, through a symbol binding on the
/// formula or an annotation of its segment.
///
/// Score is the number of query concepts times the summed per-concept
/// evidence: the binding count, or half a point for an annotation only.
pub fn search_formula_semantic(ix: &Index, query: &SemanticQuery) -> Result<Vec<Hit>, SearchError> {
    if query.concepts.is_empty() {
        return Err(SearchError::EmptyQuery);
    }
    let o = ix.ontology();
    let mut evidence: Vec<(&str, ConceptEvidence)> = Vec::new();
    for c in &query.concepts {
        if !o.contains(c) {
            return Err(SearchError::UnknownConcept(c.clone()));
        }
        let members = if query.expand {
            o.descendants(c)
                .map_err(|_| SearchError::UnknownConcept(c.clone()))?
        } else {
            BTreeSet::from([c.clone()])
        };
        let mut ev = ConceptEvidence::default();
        for m in &members {
            for p in ix.concept_postings(m) {
                match (p.via, &p.formula_id) {
                    (Via::Binding, Some(f)) => *ev.bindings.entry(f.as_str()).or_default() += 1,
                    _ => {
                        ev.segments.insert(p.segment_id.as_str());
                    }
                }
            }
        }
        ev.members = members;
        evidence.push((c.as_str(), ev));
    }

    // candidates come from the first concept; every hit needs it anyway
    let first = &evidence[0].1;
    let mut candidates: BTreeSet<&str> = first.bindings.keys().copied().collect();
    for s in &first.segments {
        if let Some((_, segment)) = ix.segment(s) {
            candidates.extend(segment.formulas.iter().map(|f| f.id.as_str()));
        }
    }

    let n = query.concepts.len() as f64;
    let mut hits = Vec::new();
    'formulas: for fid in candidates {
        let Some((entry, segment, formula)) = ix.formula(fid) else {
            continue;
        };
        let Some(ast) = &formula.ast else { continue };
        if query.scope.is_some_and(|t| t != segment.segment_type) {
            continue;
        }
        let mut total = 0.0;
        let mut explain = Vec::new();
        let mut symbols: BTreeSet<&str> = BTreeSet::new();
        for (concept, ev) in &evidence {
            if let Some(&count) = ev.bindings.get(fid) {
                total += count as f64;
                for b in entry
                    .annotations
                    .bindings
                    .iter()
                    .filter(|b| b.formula_id == fid && ev.members.contains(&b.concept_id))
                {
                    symbols.insert(&b.symbol);
                    explain.push(format!("{concept}: {} bound to {}", b.symbol, b.concept_id));
                }
            } else if ev.segments.contains(segment.id.as_str()) {
                total += ANNOTATION_WEIGHT;
                let named: BTreeSet<&str> = entry
                    .annotations
                    .annotations
                    .iter()
                    .filter(|a| a.segment_id == segment.id && ev.members.contains(&a.concept_id))
                    .map(|a| a.concept_id.as_str())
                    .collect();
                for c in named {
                    explain.push(format!("{concept}: segment mentions {c}"));
                }
            } else {
                continue 'formulas;
            }
        }
        let mut paths: Vec<NodePath> = subterms_of(&ast.root)
            .into_iter()
            .filter(
                |(_, node)| matches!(node, AstNode::Identifier { name } if symbols.contains(name.as_str())),
            )
            .map(|(path, _)| path)
            .collect();
        if paths.is_empty() {
            paths.push(NodePath::root());
        }
        hits.push(Hit {
            doc_id: entry.doc.id.clone(),
            segment_id: segment.id.clone(),
            formula_id: Some(formula.id.clone()),
            score: n * total,
            mathml: Some(to_mathml_marked(&ast.root, &paths)),
            highlights: paths.into_iter().map(|path| Highlight::Node { path }).collect(),
            explain,
        });
    }
    rank(&mut hits);
    Ok(hits)
}
