use std::collections::{BTreeSet, HashMap};

use super::Annotation;
use crate::document::Segment;
use crate::ontology::{Lang, Ontology};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Token {
    folded: String,
    /// Character offsets.
    start: usize,
    end: usize,
    /// Whether this token may continue a multi-word match begun before it.
    joins_previous: bool,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_inner_char(c: char) -> bool {
    matches!(c, '\'' | '’')
}

/// Word tokens of `text`. Formula placeholders and punctuation other than
/// whitespace and hyphens break multi-word matches.
fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut joinable = false;
    while i < chars.len() {
        let c = chars[i];
        if c == '[' && chars.get(i + 1) == Some(&'[') {
            // formula placeholder
            let mut j = i + 2;
            while j + 1 < chars.len() && !(chars[j] == ']' && chars[j + 1] == ']') {
                j += 1;
            }
            i = (j + 2).min(chars.len());
            joinable = false;
            continue;
        }
        if is_word_char(c) {
            let start = i;
            while i < chars.len()
                && (is_word_char(chars[i])
                    || (is_inner_char(chars[i]) && chars.get(i + 1).is_some_and(|&n| is_word_char(n))))
            {
                i += 1;
            }
            let folded: String = chars[start..i]
                .iter()
                .map(|&c| if c == '’' { '\'' } else { c })
                .collect::<String>()
                .to_lowercase();
            tokens.push(Token {
                folded,
                start,
                end: i,
                joins_previous: joinable,
            });
            joinable = true;
            continue;
        }
        if !(c.is_whitespace() || c == '-') {
            joinable = false;
        }
        i += 1;
    }
    tokens
}

/// Token-sequence dictionary of every ontology label in both languages.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, Vec<(String, Lang)>>,
    longest: usize,
}

impl Gazetteer {
    pub fn new(o: &Ontology) -> Self {
        let mut entries: HashMap<Vec<String>, Vec<(String, Lang)>> = HashMap::new();
        for (id, lang, label) in o.labels() {
            let key: Vec<String> = tokenize(label).into_iter().map(|t| t.folded).collect();
            if key.is_empty() {
                continue;
            }
            let slot = entries.entry(key).or_default();
            if !slot.iter().any(|(c, l)| c == id && *l == lang) {
                slot.push((id.to_string(), lang));
            }
        }
        let longest = entries.keys().map(Vec::len).max().unwrap_or(0);
        Gazetteer { entries, longest }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Left-to-right greedy longest matches; results never overlap and are
    /// sorted by start.
    pub fn extract(&self, segment: &Segment) -> Vec<Annotation> {
        let tokens = tokenize(&segment.text);
        let chars: Vec<char> = segment.text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let mut matched = None;
            let max = self.longest.min(tokens.len() - i);
            for len in (1..=max).rev() {
                if tokens[i + 1..i + len].iter().any(|t| !t.joins_previous) {
                    continue;
                }
                let key: Vec<String> = tokens[i..i + len].iter().map(|t| t.folded.clone()).collect();
                if let Some(found) = self.entries.get(&key) {
                    matched = Some((len, found));
                    break;
                }
            }
            match matched {
                Some((len, found)) => {
                    let start = tokens[i].start;
                    let end = tokens[i + len - 1].end;
                    let candidates: Vec<String> = found
                        .iter()
                        .map(|(c, _)| c.clone())
                        .collect::<BTreeSet<_>>()
                        .into_iter()
                        .collect();
                    let lang = found
                        .iter()
                        .find(|(c, _)| *c == candidates[0])
                        .map(|&(_, l)| l)
                        .unwrap_or(Lang::En);
                    out.push(Annotation {
                        segment_id: segment.id.clone(),
                        span: start..end,
                        surface: chars[start..end].iter().collect(),
                        concept_id: candidates[0].clone(),
                        lang,
                        ambiguous: candidates.len() > 1,
                        candidates,
                    });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}
