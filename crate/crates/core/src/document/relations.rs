//! Typed links between segments: containment, proof targets and the
//! relation signalled by the words in front of each `\ref`.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;

use super::{Segment, SegmentRelation, SegmentRelationKind, SegmentType};

/// A `\ref{key}` found in the text of segment `segment` at character offset
/// `offset`.
pub(crate) struct RefSite {
    pub segment: usize,
    pub key: String,
    pub offset: usize,
}

pub(crate) struct RelationInput<'a> {
    pub segments: &'a [Segment],
    pub parents: &'a [Option<usize>],
    pub labels: &'a HashMap<String, usize>,
    pub refs: &'a [RefSite],
    /// Reference keys appearing in each segment's optional title.
    pub title_refs: &'a [Vec<String>],
}

fn consequence_cue() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(therefore|hence|thus|consequently|следовательно|поэтому|отсюда)\b")
            .expect("valid regex")
    })
}

fn example_cue() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(for example|for instance|eg|example of|illustrates|например|пример)\b")
            .expect("valid regex")
    })
}

fn dependency_cue() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i)\b(by|using|from|applying|in view of|due to|according to|в силу|согласно|по|из|используя)\s+(\S+\s+){0,2}$",
        )
        .expect("valid regex")
    })
}

/// Words of the current sentence in front of a reference.
fn cue_window(text: &str, offset: usize) -> String {
    let before: String = text.chars().take(offset).collect();
    let before = before.replace("e.g.", "eg").replace("i.e.", "ie");
    let start = before
        .char_indices()
        .filter(|&(_, c)| matches!(c, '.' | '!' | '?' | ';'))
        .map(|(i, c)| i + c.len_utf8())
        .next_back()
        .unwrap_or(0);
    before[start..].to_string()
}

fn cue_kind(source: &Segment, window: &str) -> Option<SegmentRelationKind> {
    if consequence_cue().is_match(window) {
        Some(SegmentRelationKind::HasConsequence)
    } else if source.segment_type == SegmentType::Example || example_cue().is_match(window) {
        Some(SegmentRelationKind::Exemplifies)
    } else if dependency_cue().is_match(window) {
        Some(SegmentRelationKind::DependsOn)
    } else {
        None
    }
}

pub(crate) fn derive_relations(input: RelationInput<'_>) -> Vec<SegmentRelation> {
    let segments = input.segments;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut emit = |src: usize, kind: SegmentRelationKind, dst: usize| {
        if seen.insert((src, kind, dst)) {
            out.push(SegmentRelation {
                src: segments[src].id.clone(),
                kind,
                dst: segments[dst].id.clone(),
            });
        }
    };

    for (child, parent) in input.parents.iter().enumerate() {
        if let Some(parent) = parent {
            emit(*parent, SegmentRelationKind::HasSegment, child);
        }
    }

    for (index, segment) in segments.iter().enumerate() {
        if segment.segment_type != SegmentType::Proof {
            continue;
        }
        let explicit = input.title_refs[index]
            .iter()
            .filter_map(|key| input.labels.get(key).copied())
            .find(|&target| segments[target].segment_type.is_provable());
        let target = explicit.or_else(|| {
            segments[..index]
                .iter()
                .rposition(|s| s.segment_type.is_provable() && s.span.end <= segment.span.start)
        });
        if let Some(target) = target {
            emit(index, SegmentRelationKind::Proves, target);
        }
    }

    for site in input.refs {
        let Some(&target) = input.labels.get(&site.key) else {
            continue;
        };
        if target == site.segment {
            continue;
        }
        let source = &segments[site.segment];
        emit(site.segment, SegmentRelationKind::RefersTo, target);
        let window = cue_window(&source.text, site.offset);
        if let Some(kind) = cue_kind(source, &window) {
            emit(site.segment, kind, target);
        }
    }
    out
}
