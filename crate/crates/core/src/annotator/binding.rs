use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use super::{Annotation, VariableBinding};
use crate::document::Segment;
use crate::formula::AstNode;

/// The shipped template file.
pub const DEFAULT_PATTERNS: &str = include_str!("../../config/binding_patterns.txt");

const SYM_OPEN: char = '⟦';
const SYM_CLOSE: char = '⟧';
const TERM_OPEN: char = '⟪';
const TERM_CLOSE: char = '⟫';

#[derive(Debug, Error)]
pub enum PatternConfigError {
    #[error("pattern line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compiled defining-phrase templates.
#[derive(Debug, Clone)]
pub struct BindingPatterns {
    templates: Vec<(String, Regex)>,
}

impl Default for BindingPatterns {
    fn default() -> Self {
        BindingPatterns::parse(DEFAULT_PATTERNS).expect("shipped patterns are valid")
    }
}

fn compile_template(template: &str) -> Result<Regex, String> {
    let words: Vec<&str> = template.split_whitespace().collect();
    let count = |tag: &str| words.iter().filter(|w| **w == tag).count();
    if count("<SYM>") != 1 || count("<TERM>") != 1 {
        return Err("template needs exactly one <SYM> and one <TERM>".into());
    }
    let mut parts = Vec::new();
    for word in &words {
        parts.push(match *word {
            "<SYM>" => format!("{SYM_OPEN}(?P<sym>\\d+){SYM_CLOSE}"),
            "<TERM>" => format!(
                "(?:[^\\s{SYM_OPEN}{SYM_CLOSE}{TERM_OPEN}{TERM_CLOSE}]+\\s+){{0,2}}?{TERM_OPEN}(?P<term>\\d+){TERM_CLOSE}"
            ),
            "—" | "–" | "-" | "--" | "---" => "(?:—|–|-{1,3})".to_string(),
            literal => regex::escape(literal),
        });
    }
    let lead = if words[0].starts_with(|c: char| c.is_alphanumeric()) {
        "\\b"
    } else {
        ""
    };
    Regex::new(&format!("(?i){lead}{}", parts.join("\\s+"))).map_err(|e| e.to_string())
}

impl BindingPatterns {
    /// Parses a template file: one template per line, `#` comments and blank
    /// lines ignored.
    pub fn parse(config: &str) -> Result<Self, PatternConfigError> {
        let mut templates = Vec::new();
        for (index, line) in config.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let regex = compile_template(line).map_err(|message| PatternConfigError::Invalid {
                line: index + 1,
                message,
            })?;
            templates.push((line.to_string(), regex));
        }
        Ok(BindingPatterns { templates })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PatternConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn templates(&self) -> impl Iterator<Item = &str> {
        self.templates.iter().map(|(t, _)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\[f(\d+)\]\]").expect("valid regex"))
}

/// Name of a formula that is a single identifier.
fn lone_symbol(root: &AstNode) -> Option<&str> {
    match root {
        AstNode::Identifier { name } => Some(name),
        _ => None,
    }
}

/// Segment text with annotations replaced by `⟪i⟫` and single-identifier
/// formulas by `⟦k⟧`; `origin[c]` is the source character range of masked
/// character `c`.
struct Masked {
    text: String,
    origin: Vec<Range<usize>>,
}

fn mask(segment: &Segment, annotations: &[Annotation]) -> Masked {
    let text = &segment.text;
    let char_of: BTreeMap<usize, usize> = text
        .char_indices()
        .enumerate()
        .map(|(ci, (bi, _))| (bi, ci))
        .chain(std::iter::once((text.len(), text.chars().count())))
        .collect();
    // (char range, replacement)
    let mut pieces: Vec<(Range<usize>, String)> = Vec::new();
    for (i, a) in annotations.iter().enumerate() {
        pieces.push((a.span.clone(), format!("{TERM_OPEN}{i}{TERM_CLOSE}")));
    }
    for caps in placeholder_re().captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let number: usize = caps[1].parse().unwrap_or(0);
        let Some(k) = segment.formulas.iter().position(|f| f.number() == number) else {
            continue;
        };
        if segment.formulas[k]
            .ast
            .as_ref()
            .and_then(|a| lone_symbol(&a.root))
            .is_some()
        {
            pieces.push((
                char_of[&whole.start()]..char_of[&whole.end()],
                format!("{SYM_OPEN}{k}{SYM_CLOSE}"),
            ));
        }
    }
    pieces.sort_by_key(|(r, _)| r.start);

    let chars: Vec<char> = text.chars().collect();
    let mut out = Masked {
        text: String::new(),
        origin: Vec::new(),
    };
    let mut c = 0;
    for (range, replacement) in pieces {
        if range.start < c {
            continue;
        }
        for (offset, ch) in chars[c..range.start].iter().enumerate() {
            out.text.push(*ch);
            out.origin.push(c + offset..c + offset + 1);
        }
        for ch in replacement.chars() {
            out.text.push(ch);
            out.origin.push(range.clone());
        }
        c = range.end;
    }
    for (offset, ch) in chars[c..].iter().enumerate() {
        out.text.push(*ch);
        out.origin.push(c + offset..c + offset + 1);
    }
    out
}

impl Masked {
    fn source_span(&self, bytes: Range<usize>) -> Range<usize> {
        let first = self.text[..bytes.start].chars().count();
        let last = first + self.text[bytes].chars().count() - 1;
        self.origin[first].start..self.origin[last].end
    }
}

/// Binds formula symbols to the annotated terms of defining phrases in the
/// same segment. A later definition of a symbol shadows earlier ones; the
/// surviving definition applies to every other formula of the segment that
/// contains the symbol as an identifier.
pub fn bind_variables(
    segment: &Segment,
    annotations: &[Annotation],
    patterns: &BindingPatterns,
) -> Vec<VariableBinding> {
    let own: Vec<Annotation> = annotations
        .iter()
        .filter(|a| a.segment_id == segment.id)
        .cloned()
        .collect();
    if own.is_empty() || segment.formulas.is_empty() {
        return Vec::new();
    }
    let masked = mask(segment, &own);

    // (start, symbol, concept, defining formula, evidence)
    let mut definitions: Vec<(usize, String, String, usize, Range<usize>)> = Vec::new();
    for (_, regex) in &patterns.templates {
        for caps in regex.captures_iter(&masked.text) {
            let (Some(sym), Some(term)) = (caps.name("sym"), caps.name("term")) else {
                continue;
            };
            let k: usize = sym.as_str().parse().unwrap_or(usize::MAX);
            let t: usize = term.as_str().parse().unwrap_or(usize::MAX);
            let (Some(formula), Some(annotation)) = (segment.formulas.get(k), own.get(t)) else {
                continue;
            };
            let Some(symbol) = formula.ast.as_ref().and_then(|a| lone_symbol(&a.root)) else {
                continue;
            };
            let whole = caps.get(0).expect("match");
            let evidence = masked.source_span(whole.range());
            definitions.push((
                evidence.start,
                symbol.to_string(),
                annotation.concept_id.clone(),
                k,
                evidence,
            ));
        }
    }
    // overlapping templates on one placeholder: keep the longest phrase
    definitions.sort_by(|a, b| (a.3, a.0, &a.2).cmp(&(b.3, b.0, &b.2)));
    definitions.dedup_by_key(|d| d.3);
    definitions.sort_by(|a, b| (a.0, &a.1, &a.2).cmp(&(b.0, &b.1, &b.2)));
    let defining: BTreeSet<usize> = definitions.iter().map(|d| d.3).collect();
    let mut latest: BTreeMap<String, (String, Range<usize>)> = BTreeMap::new();
    for (_, symbol, concept, _, evidence) in definitions {
        latest.insert(symbol, (concept, evidence));
    }

    let mut out = Vec::new();
    for (symbol, (concept, evidence)) in latest {
        for (k, formula) in segment.formulas.iter().enumerate() {
            if defining.contains(&k) {
                continue;
            }
            if formula
                .ast
                .as_ref()
                .is_some_and(|a| a.root.contains_identifier(&symbol))
            {
                out.push(VariableBinding {
                    segment_id: segment.id.clone(),
                    formula_id: formula.id.clone(),
                    symbol: symbol.clone(),
                    concept_id: concept.clone(),
                    evidence: evidence.clone(),
                });
            }
        }
    }
    out.sort_by(|a, b| (&a.formula_id, &a.symbol).cmp(&(&b.formula_id, &b.symbol)));
    out
}
