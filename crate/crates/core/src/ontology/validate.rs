use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{ConceptKind, Lang, Ontology, RelationEdge, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "issue", rename_all = "camelCase")]
pub enum ValidationIssue {
    DuplicateId { id: String },
    EmptyId,
    NoLabels { id: String },
    MissingLabel { id: String, lang: Lang },
    InvalidLink { id: String, link: String },
    DanglingEndpoint { edge: RelationEdge, missing: String },
    IsaSelfLoop { id: String },
    IsaCycle { cycle: Vec<String> },
    KindDomain { edge: RelationEdge, rule: &'static str },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DuplicateId { id } => write!(f, "duplicate concept id '{id}'"),
            ValidationIssue::EmptyId => write!(f, "concept with empty id"),
            ValidationIssue::NoLabels { id } => write!(f, "concept '{id}' has no labels"),
            ValidationIssue::MissingLabel { id, lang } => {
                write!(f, "concept '{id}' has no '{lang}' label")
            }
            ValidationIssue::InvalidLink { id, link } => {
                write!(f, "concept '{id}' has an invalid external link '{link}'")
            }
            ValidationIssue::DanglingEndpoint { edge, missing } => write!(
                f,
                "edge {} {} {} references unknown concept '{missing}'",
                edge.src, edge.kind, edge.dst
            ),
            ValidationIssue::IsaSelfLoop { id } => write!(f, "IsA self-loop on '{id}'"),
            ValidationIssue::IsaCycle { cycle } => write!(f, "IsA cycle: {}", cycle.join(",")),
            ValidationIssue::KindDomain { edge, rule } => {
                write!(f, "{rule} ({} {} {})", edge.src, edge.kind, edge.dst)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        write!(
            f,
            "{} error(s), {} warning(s)",
            self.errors.len(),
            self.warnings.len()
        )
    }
}

/// Absolute IRI check: a scheme, a colon and no characters IRIs forbid.
pub fn is_valid_iri(iri: &str) -> bool {
    let Some((scheme, rest)) = iri.split_once(':') else {
        return false;
    };
    let mut sc = scheme.chars();
    sc.next().is_some_and(|c| c.is_ascii_alphabetic())
        && sc.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        && !rest.is_empty()
        && !rest.chars().any(|c| {
            c.is_whitespace()
                || c.is_control()
                || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '\\' | '^' | '`')
        })
}

pub fn validate(o: &Ontology) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = BTreeSet::new();
    for concept in o.concepts() {
        if concept.id.is_empty() {
            report.errors.push(ValidationIssue::EmptyId);
        } else if !seen.insert(concept.id.as_str()) {
            report.errors.push(ValidationIssue::DuplicateId {
                id: concept.id.clone(),
            });
        }
        let has = |lang: Lang| concept.labels_in(lang).iter().any(|l| !l.trim().is_empty());
        if !Lang::ALL.iter().any(|&l| has(l)) {
            report.errors.push(ValidationIssue::NoLabels {
                id: concept.id.clone(),
            });
        } else {
            for lang in Lang::ALL {
                if !has(lang) {
                    report.warnings.push(ValidationIssue::MissingLabel {
                        id: concept.id.clone(),
                        lang,
                    });
                }
            }
        }
        for link in &concept.external_links {
            if !is_valid_iri(link) {
                report.errors.push(ValidationIssue::InvalidLink {
                    id: concept.id.clone(),
                    link: link.clone(),
                });
            }
        }
    }

    let mut isa: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for edge in o.edges() {
        let mut dangling = false;
        for endpoint in [&edge.src, &edge.dst] {
            if !o.contains(endpoint) {
                dangling = true;
                report.errors.push(ValidationIssue::DanglingEndpoint {
                    edge: edge.clone(),
                    missing: endpoint.clone(),
                });
            }
        }
        if dangling {
            continue;
        }
        let src = o.kind_of(&edge.src);
        let dst = o.kind_of(&edge.dst);
        let rule = match edge.kind {
            RelationKind::IsA if edge.src == edge.dst => {
                report
                    .errors
                    .push(ValidationIssue::IsaSelfLoop { id: edge.src.clone() });
                None
            }
            RelationKind::IsA => {
                isa.entry(edge.src.as_str())
                    .or_default()
                    .insert(edge.dst.as_str());
                (src != dst).then_some("IsA must connect concepts of the same kind")
            }
            RelationKind::BelongsTo if dst != Some(ConceptKind::Area) => {
                Some("BelongsTo must target an Area")
            }
            RelationKind::BelongsTo if src != Some(ConceptKind::Object) => {
                Some("BelongsTo must originate from an Object")
            }
            RelationKind::BelongsTo => None,
            RelationKind::SolvedBy | RelationKind::DefinedBy | RelationKind::SeeAlso => {
                let objects = src == Some(ConceptKind::Object) && dst == Some(ConceptKind::Object);
                (!objects).then_some(match edge.kind {
                    RelationKind::SolvedBy => "SolvedBy must connect two Objects",
                    RelationKind::DefinedBy => "DefinedBy must connect two Objects",
                    _ => "SeeAlso must connect two Objects",
                })
            }
        };
        if let Some(rule) = rule {
            report.errors.push(ValidationIssue::KindDomain {
                edge: edge.clone(),
                rule,
            });
        }
    }

    for cycle in isa_cycles(&isa) {
        report.errors.push(ValidationIssue::IsaCycle { cycle });
    }
    report
}

/// One concrete cycle per non-trivial strongly connected component, starting
/// at the component's smallest id.
fn isa_cycles(graph: &BTreeMap<&str, BTreeSet<&str>>) -> Vec<Vec<String>> {
    let mut cycles = Vec::new();
    for component in strongly_connected(graph) {
        if component.len() < 2 {
            continue;
        }
        let start = *component.iter().next().expect("non-empty");
        // BFS from start back to start inside the component
        let mut prev: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue = VecDeque::from([start]);
        let mut closing = None;
        while let Some(node) = queue.pop_front() {
            for &next in graph.get(node).into_iter().flatten() {
                if !component.contains(next) {
                    continue;
                }
                if next == start {
                    closing = Some(node);
                    break;
                }
                if !prev.contains_key(next) {
                    prev.insert(next, node);
                    queue.push_back(next);
                }
            }
            if closing.is_some() {
                break;
            }
        }
        let mut path = Vec::new();
        let mut cur = closing.expect("component has a cycle through its start");
        while cur != start {
            path.push(cur.to_string());
            cur = prev[cur];
        }
        path.push(start.to_string());
        path.reverse();
        cycles.push(path);
    }
    cycles
}

fn strongly_connected<'a>(graph: &BTreeMap<&'a str, BTreeSet<&'a str>>) -> Vec<BTreeSet<&'a str>> {
    struct Tarjan<'a, 'g> {
        graph: &'g BTreeMap<&'a str, BTreeSet<&'a str>>,
        index: BTreeMap<&'a str, usize>,
        low: BTreeMap<&'a str, usize>,
        stack: Vec<&'a str>,
        on_stack: BTreeSet<&'a str>,
        next: usize,
        out: Vec<BTreeSet<&'a str>>,
    }
    impl<'a> Tarjan<'a, '_> {
        fn visit(&mut self, v: &'a str) {
            self.index.insert(v, self.next);
            self.low.insert(v, self.next);
            self.next += 1;
            self.stack.push(v);
            self.on_stack.insert(v);
            let succ: Vec<&'a str> = self.graph.get(v).into_iter().flatten().copied().collect();
            for w in succ {
                if !self.index.contains_key(w) {
                    self.visit(w);
                    let lw = self.low[w];
                    let lv = self.low.get_mut(v).expect("visited");
                    *lv = (*lv).min(lw);
                } else if self.on_stack.contains(w) {
                    let iw = self.index[w];
                    let lv = self.low.get_mut(v).expect("visited");
                    *lv = (*lv).min(iw);
                }
            }
            if self.low[v] == self.index[v] {
                let mut component = BTreeSet::new();
                while let Some(w) = self.stack.pop() {
                    self.on_stack.remove(w);
                    component.insert(w);
                    if w == v {
                        break;
                    }
                }
                self.out.push(component);
            }
        }
    }
    let mut t = Tarjan {
        graph,
        index: BTreeMap::new(),
        low: BTreeMap::new(),
        stack: Vec::new(),
        on_stack: BTreeSet::new(),
        next: 0,
        out: Vec::new(),
    };
    let nodes: BTreeSet<&str> = graph
        .iter()
        .flat_map(|(k, vs)| std::iter::once(*k).chain(vs.iter().copied()))
        .collect();
    for v in nodes {
        if !t.index.contains_key(v) {
            t.visit(v);
        }
    }
    t.out.sort();
    t.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::test_support::*;
    use RelationKind::*;

    #[test]
    fn two_cycle_is_reported_in_order() {
        let o = build(
            vec![object("A", "a", "а"), object("B", "b", "б")],
            vec![edge("A", IsA, "B"), edge("B", IsA, "A")],
        );
        let report = validate(&o);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].to_string(), "IsA cycle: A,B");
    }

    #[test]
    fn longer_cycle_and_self_loop() {
        let o = build(
            vec![
                object("C", "c", "в"),
                object("A", "a", "а"),
                object("B", "b", "б"),
            ],
            vec![
                edge("A", IsA, "B"),
                edge("B", IsA, "C"),
                edge("C", IsA, "A"),
                edge("A", IsA, "A"),
            ],
        );
        let msgs: Vec<String> = validate(&o).errors.iter().map(|e| e.to_string()).collect();
        assert!(msgs.contains(&"IsA cycle: A,B,C".to_string()), "{msgs:?}");
        assert!(msgs.contains(&"IsA self-loop on 'A'".to_string()));
    }

    #[test]
    fn belongs_to_must_target_area() {
        let o = build(
            vec![object("X", "x", "х"), object("Y", "y", "у")],
            vec![edge("X", BelongsTo, "Y")],
        );
        let report = validate(&o);
        assert_eq!(report.errors.len(), 1);
        assert!(report.errors[0]
            .to_string()
            .starts_with("BelongsTo must target an Area"));
    }

    #[test]
    fn missing_russian_label_is_a_warning() {
        let o = build(vec![concept("X", ConceptKind::Object, &["x"], &[])], vec![]);
        let report = validate(&o);
        assert!(report.errors.is_empty());
        assert_eq!(
            report.warnings,
            vec![ValidationIssue::MissingLabel {
                id: "X".into(),
                lang: Lang::Ru
            }]
        );
        let bare = build(vec![concept("Y", ConceptKind::Object, &[], &[])], vec![]);
        assert!(!validate(&bare).is_valid());
    }

    #[test]
    fn lenient_build_reports_integrity_problems() {
        let o = build(
            vec![object("A", "a", "а"), object("A", "a2", "а2")],
            vec![edge("A", SeeAlso, "Ghost")],
        );
        let report = validate(&o);
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationIssue::DuplicateId { .. })));
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationIssue::DanglingEndpoint { .. })));
    }

    #[test]
    fn iri_syntax() {
        assert!(is_valid_iri("http://dbpedia.org/resource/Polygon"));
        assert!(is_valid_iri("urn:isbn:123"));
        assert!(!is_valid_iri("not an iri"));
        assert!(!is_valid_iri("http://x.org/a b"));
        assert!(!is_valid_iri("1http://x"));
    }
}
