use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::formula::{to_mathml_marked, NodePath};

use super::{Highlight, Hit, Index, SearchError};

/// Characters kept on each side of the focus span.
pub const WINDOW: usize = 80;

/// Displayable excerpt of a hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snippet {
    pub text: String,
    /// Character offsets into `text`.
    pub marks: Vec<Range<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mathml: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<NodePath>,
}

/// Segment text around the hit with its spans marked, plus the formula's
/// MathML with the highlighted nodes marked for formula hits.
pub fn highlight(hit: &Hit, ix: &Index) -> Result<Snippet, SearchError> {
    let (_, segment) = ix
        .segment(&hit.segment_id)
        .filter(|(entry, _)| entry.doc.id == hit.doc_id)
        .ok_or_else(|| SearchError::StaleHit(hit.segment_id.clone()))?;
    let chars: Vec<char> = segment.text.chars().collect();

    let mut spans: Vec<Range<usize>> = Vec::new();
    let mut mathml = None;
    let mut paths = Vec::new();
    if let Some(fid) = &hit.formula_id {
        let (_, owner, formula) = ix
            .formula(fid)
            .filter(|(_, s, _)| s.id == segment.id)
            .ok_or_else(|| SearchError::StaleHit(fid.clone()))?;
        debug_assert_eq!(owner.id, segment.id);
        let placeholder: Vec<char> = formula.placeholder().chars().collect();
        if let Some(start) = chars
            .windows(placeholder.len())
            .position(|w| w == placeholder.as_slice())
        {
            spans.push(start..start + placeholder.len());
        }
        paths = hit
            .highlights
            .iter()
            .filter_map(|h| match h {
                Highlight::Node { path } => Some(path.clone()),
                Highlight::Text { .. } => None,
            })
            .collect();
        mathml = formula
            .ast
            .as_ref()
            .map(|ast| to_mathml_marked(&ast.root, &paths));
    }
    for h in &hit.highlights {
        if let Highlight::Text { start, end } = *h {
            if start < end && end <= chars.len() {
                spans.push(start..end);
            }
        }
    }
    spans.sort_by_key(|r| (r.start, r.end));

    let (from, to) = match spans.first() {
        Some(focus) => (
            focus.start.saturating_sub(WINDOW),
            (focus.end + WINDOW).min(chars.len()),
        ),
        None => (0, (2 * WINDOW).min(chars.len())),
    };
    let marks = spans
        .into_iter()
        .filter(|r| r.start >= from && r.end <= to)
        .map(|r| r.start - from..r.end - from)
        .collect();
    Ok(Snippet {
        text: chars[from..to].iter().collect(),
        marks,
        mathml,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{search_formula_syntactic, search_segments};
    use super::*;
    use crate::document::{SegmentRelationKind, SegmentType};
    use crate::formula::FormulaPattern;
    use crate::ontology::test_support::*;
    use crate::ontology::Ontology;

    #[test]
    fn formula_hit_snippet() {
        let ix = index(
            Ontology::empty(),
            &[("d", &article("We have $x^2+y^2=z^2$ here."))],
        );
        let hits = search_formula_syntactic(&ix, &FormulaPattern::parse("?a^2").unwrap());
        let snippet = highlight(&hits[0], &ix).unwrap();
        assert_eq!(snippet.text, "We have [[f1]] here.");
        assert_eq!(snippet.marks, std::iter::once(8..14).collect::<Vec<_>>());
        assert_eq!(snippet.paths.len(), 3);
        assert_eq!(snippet.mathml.unwrap().matches("class=\"highlight\"").count(), 3);
    }

    #[test]
    fn text_window() {
        let o = build(
            vec![object("FermatTheorem", "Fermat's theorem", "теорема Ферма")],
            vec![],
        );
        let padding = "word ".repeat(40);
        let body = format!(
            "\\begin{{theorem}}X.\\end{{theorem}}\\begin{{proof}}{padding}Fermat's theorem {padding}\\end{{proof}}"
        );
        let ix = index(o, &[("d", &article(&body))]);
        let hits = search_segments(
            &ix,
            SegmentType::Theorem,
            SegmentRelationKind::Proves,
            "FermatTheorem",
        )
        .unwrap();
        assert!(hits[0].highlights.is_empty());
        let mut hit = hits[0].clone();
        hit.segment_id = "d#s2".into();
        hit.highlights = vec![Highlight::Text { start: 200, end: 216 }];
        let snippet = highlight(&hit, &ix).unwrap();
        assert_eq!(snippet.text.chars().count(), 80 + 16 + 80);
        assert_eq!(snippet.marks, std::iter::once(80..96).collect::<Vec<_>>());
        let marked: String = snippet.text.chars().skip(80).take(16).collect();
        assert_eq!(marked, "Fermat's theorem");
    }

    #[test]
    fn stale_hit() {
        let ix = index(Ontology::empty(), &[("d", &article("$x$"))]);
        let hit = Hit {
            doc_id: "d".into(),
            segment_id: "d#s1".into(),
            formula_id: Some("d#f9".into()),
            score: 1.0,
            highlights: vec![],
            explain: vec![],
            mathml: None,
        };
        assert!(matches!(highlight(&hit, &ix), Err(SearchError::StaleHit(_))));
        let gone = Hit {
            segment_id: "e#s1".into(),
            ..hit
        };
        assert!(matches!(highlight(&gone, &ix), Err(SearchError::StaleHit(_))));
    }
}
