//! LaTeX articles as typed logical segments linked by structural relations.

mod latex;
mod relations;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::FormulaAst;
use crate::ontology::Lang;

pub use latex::{extract_metadata, parse_document};
pub use text::strip_markup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SegmentType {
    Document,
    DocumentSegment,
    Claim,
    Definition,
    Proposition,
    Example,
    Axiom,
    Theorem,
    Lemma,
    Proof,
    Equation,
    Corollary,
    Remark,
    Conjecture,
    Notation,
}

impl SegmentType {
    pub const ALL: [SegmentType; 15] = [
        SegmentType::Document,
        SegmentType::DocumentSegment,
        SegmentType::Claim,
        SegmentType::Definition,
        SegmentType::Proposition,
        SegmentType::Example,
        SegmentType::Axiom,
        SegmentType::Theorem,
        SegmentType::Lemma,
        SegmentType::Proof,
        SegmentType::Equation,
        SegmentType::Corollary,
        SegmentType::Remark,
        SegmentType::Conjecture,
        SegmentType::Notation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentType::Document => "Document",
            SegmentType::DocumentSegment => "DocumentSegment",
            SegmentType::Claim => "Claim",
            SegmentType::Definition => "Definition",
            SegmentType::Proposition => "Proposition",
            SegmentType::Example => "Example",
            SegmentType::Axiom => "Axiom",
            SegmentType::Theorem => "Theorem",
            SegmentType::Lemma => "Lemma",
            SegmentType::Proof => "Proof",
            SegmentType::Equation => "Equation",
            SegmentType::Corollary => "Corollary",
            SegmentType::Remark => "Remark",
            SegmentType::Conjecture => "Conjecture",
            SegmentType::Notation => "Notation",
        }
    }

    /// Case-insensitive lookup by name.
    pub fn parse(name: &str) -> Option<SegmentType> {
        SegmentType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(name.trim()))
    }

    /// Segment types a proof can prove.
    pub fn is_provable(self) -> bool {
        matches!(
            self,
            SegmentType::Theorem
                | SegmentType::Lemma
                | SegmentType::Proposition
                | SegmentType::Corollary
                | SegmentType::Claim
        )
    }
}

impl fmt::Display for SegmentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SegmentRelationKind {
    DependsOn,
    Exemplifies,
    HasConsequence,
    HasSegment,
    Proves,
    RefersTo,
}

impl SegmentRelationKind {
    pub const ALL: [SegmentRelationKind; 6] = [
        SegmentRelationKind::DependsOn,
        SegmentRelationKind::Exemplifies,
        SegmentRelationKind::HasConsequence,
        SegmentRelationKind::HasSegment,
        SegmentRelationKind::Proves,
        SegmentRelationKind::RefersTo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SegmentRelationKind::DependsOn => "dependsOn",
            SegmentRelationKind::Exemplifies => "exemplifies",
            SegmentRelationKind::HasConsequence => "hasConsequence",
            SegmentRelationKind::HasSegment => "hasSegment",
            SegmentRelationKind::Proves => "proves",
            SegmentRelationKind::RefersTo => "refersTo",
        }
    }

    pub fn parse(name: &str) -> Option<SegmentRelationKind> {
        SegmentRelationKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for SegmentRelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A math fragment of a segment. `ast` is `None` when the TeX could not be
/// parsed; the record is kept with the parse error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    /// `<doc_id>#f<n>`, numbered from 1 in document order.
    pub id: String,
    pub tex: String,
    pub display: bool,
    pub ast: Option<FormulaAst>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub span: Range<usize>,
}

impl Formula {
    pub fn is_parsed(&self) -> bool {
        self.ast.is_some()
    }

    /// The `n` of `…#f<n>`.
    pub fn number(&self) -> usize {
        local_number(&self.id, 'f')
    }

    /// Text marker standing for this formula inside segment text.
    pub fn placeholder(&self) -> String {
        placeholder(self.number())
    }
}

pub fn placeholder(number: usize) -> String {
    format!("[[f{number}]]")
}

fn local_number(id: &str, marker: char) -> usize {
    id.rsplit_once('#')
        .and_then(|(_, local)| local.strip_prefix(marker))
        .and_then(|n| n.parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// `<doc_id>#s<n>` in document order; the root is `s0`.
    pub id: String,
    #[serde(rename = "type")]
    pub segment_type: SegmentType,
    pub title: Option<String>,
    pub label: Option<String>,
    /// Plain text with `[[f<n>]]` formula placeholders.
    pub text: String,
    pub formulas: Vec<Formula>,
    /// Byte offsets into the source file.
    pub span: Range<usize>,
}

impl Segment {
    pub fn number(&self) -> usize {
        local_number(&self.id, 's')
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentRelation {
    pub src: String,
    pub kind: SegmentRelationKind,
    pub dst: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    pub title: String,
    pub authors: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub keywords: Vec<String>,
    pub language: Lang,
    pub source_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MathDocument {
    pub id: String,
    pub metadata: Metadata,
    pub segments: Vec<Segment>,
    pub relations: Vec<SegmentRelation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("structure error at offset {offset}: {message}")]
    Structure { offset: usize, message: String },
    #[error("input is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("document has no \\title")]
    MissingTitle,
}

impl MathDocument {
    pub fn root(&self) -> &Segment {
        &self.segments[0]
    }

    pub fn segment(&self, id: &str) -> Option<&Segment> {
        let n = local_number(id, 's');
        self.segments
            .get(n)
            .filter(|s| s.id == id)
            .or_else(|| self.segments.iter().find(|s| s.id == id))
    }

    pub fn formula(&self, id: &str) -> Option<(&Segment, &Formula)> {
        self.segments
            .iter()
            .find_map(|s| s.formulas.iter().find(|f| f.id == id).map(|f| (s, f)))
    }

    pub fn formulas(&self) -> impl Iterator<Item = (&Segment, &Formula)> {
        self.segments
            .iter()
            .flat_map(|s| s.formulas.iter().map(move |f| (s, f)))
    }

    pub fn parent_of(&self, id: &str) -> Option<&str> {
        self.relations
            .iter()
            .find(|r| r.kind == SegmentRelationKind::HasSegment && r.dst == id)
            .map(|r| r.src.as_str())
    }

    pub fn relations_from<'a>(
        &'a self,
        id: &'a str,
        kind: SegmentRelationKind,
    ) -> impl Iterator<Item = &'a SegmentRelation> + 'a {
        self.relations
            .iter()
            .filter(move |r| r.src == id && r.kind == kind)
    }

    /// Checks the structural invariants: unique ids, a single `Document`
    /// root, closed relations, `hasSegment` forming a tree, and well-typed
    /// `proves` edges.
    pub fn check(&self) -> Result<(), String> {
        let ids: BTreeSet<&str> = self.segments.iter().map(|s| s.id.as_str()).collect();
        if ids.len() != self.segments.len() {
            return Err("duplicate segment ids".into());
        }
        let roots = self
            .segments
            .iter()
            .filter(|s| s.segment_type == SegmentType::Document)
            .count();
        if roots != 1 || self.segments.first().map(|s| s.segment_type) != Some(SegmentType::Document) {
            return Err(format!(
                "expected exactly one leading Document segment, found {roots}"
            ));
        }
        let mut parents: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &self.relations {
            if !ids.contains(r.src.as_str()) || !ids.contains(r.dst.as_str()) {
                return Err(format!("dangling relation {} {} {}", r.src, r.kind, r.dst));
            }
            match r.kind {
                SegmentRelationKind::HasSegment => *parents.entry(r.dst.as_str()).or_default() += 1,
                SegmentRelationKind::Proves => {
                    let src = self.segment(&r.src).map(|s| s.segment_type);
                    let dst = self.segment(&r.dst).map(|s| s.segment_type);
                    if src != Some(SegmentType::Proof) || !dst.is_some_and(|t| t.is_provable()) {
                        return Err(format!("ill-typed proves edge {} -> {}", r.src, r.dst));
                    }
                }
                _ => {}
            }
        }
        for s in &self.segments[1..] {
            if parents.get(s.id.as_str()) != Some(&1) {
                return Err(format!("segment {} does not have exactly one parent", s.id));
            }
        }
        if parents.contains_key(self.segments[0].id.as_str()) {
            return Err("root has a parent".into());
        }
        let mut formula_ids = BTreeSet::new();
        for (segment, formula) in self.formulas() {
            if !formula_ids.insert(formula.id.as_str()) {
                return Err(format!("duplicate formula id {}", formula.id));
            }
            if segment.text.matches(&formula.placeholder()).count() != 1 {
                return Err(format!(
                    "formula {} is not referenced exactly once in {}",
                    formula.id, segment.id
                ));
            }
        }
        Ok(())
    }
}

/// Outgoing relations of every segment (empty lists included).
pub fn segment_graph(doc: &MathDocument) -> BTreeMap<String, Vec<SegmentRelation>> {
    let mut graph: BTreeMap<String, Vec<SegmentRelation>> =
        doc.segments.iter().map(|s| (s.id.clone(), Vec::new())).collect();
    for r in &doc.relations {
        if let Some(out) = graph.get_mut(&r.src) {
            out.push(r.clone());
        }
    }
    graph
}
