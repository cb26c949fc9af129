use std::collections::HashMap;
use std::ops::Range;
use std::sync::OnceLock;

use regex::Regex;

use super::relations::{derive_relations, RefSite, RelationInput};
use super::text::{
    find_unescaped, read_command, read_group, read_optional, skip_ws, strip_markup, TextBuilder,
};
use super::{placeholder, DocumentError, Formula, MathDocument, Metadata, Segment, SegmentType};
use crate::formula::parse_tex_formula;
use crate::ontology::Lang;

/// Environments that become `Equation` segments, one formula per row.
const EQUATION_ENVS: &[&str] = &[
    "equation",
    "equation*",
    "align",
    "align*",
    "gather",
    "gather*",
    "multline",
    "multline*",
    "eqnarray",
    "eqnarray*",
    "flalign",
    "flalign*",
];

/// Display math that stays inside the enclosing segment.
const DISPLAY_ENVS: &[&str] = &["displaymath", "math"];

/// Environments whose content is skipped entirely.
const OPAQUE_ENVS: &[&str] = &["abstract", "verbatim", "lstlisting", "comment", "thebibliography"];

const SECTION_COMMANDS: &[(&str, u8)] = &[("section", 1), ("subsection", 2), ("subsubsection", 3)];

/// Printed theorem titles and environment names, English and Russian.
const TYPE_NAMES: &[(&str, SegmentType)] = &[
    ("theorem", SegmentType::Theorem),
    ("thm", SegmentType::Theorem),
    ("теорема", SegmentType::Theorem),
    ("lemma", SegmentType::Lemma),
    ("lem", SegmentType::Lemma),
    ("лемма", SegmentType::Lemma),
    ("definition", SegmentType::Definition),
    ("defn", SegmentType::Definition),
    ("def", SegmentType::Definition),
    ("определение", SegmentType::Definition),
    ("proposition", SegmentType::Proposition),
    ("prop", SegmentType::Proposition),
    ("предложение", SegmentType::Proposition),
    ("corollary", SegmentType::Corollary),
    ("cor", SegmentType::Corollary),
    ("следствие", SegmentType::Corollary),
    ("claim", SegmentType::Claim),
    ("clm", SegmentType::Claim),
    ("утверждение", SegmentType::Claim),
    ("example", SegmentType::Example),
    ("ex", SegmentType::Example),
    ("exa", SegmentType::Example),
    ("пример", SegmentType::Example),
    ("axiom", SegmentType::Axiom),
    ("ax", SegmentType::Axiom),
    ("аксиома", SegmentType::Axiom),
    ("remark", SegmentType::Remark),
    ("rem", SegmentType::Remark),
    ("замечание", SegmentType::Remark),
    ("conjecture", SegmentType::Conjecture),
    ("conj", SegmentType::Conjecture),
    ("гипотеза", SegmentType::Conjecture),
    ("notation", SegmentType::Notation),
    ("nota", SegmentType::Notation),
    ("обозначение", SegmentType::Notation),
    ("обозначения", SegmentType::Notation),
    ("proof", SegmentType::Proof),
    ("доказательство", SegmentType::Proof),
];

fn type_for_name(name: &str) -> Option<SegmentType> {
    let name = name.trim().trim_end_matches('*').to_lowercase();
    TYPE_NAMES.iter().find(|(n, _)| *n == name).map(|&(_, t)| t)
}

fn newtheorem_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"\\newtheorem\*?\s*\{([^}]*)\}\s*(?:\[[^\]]*\]\s*)?\{([^}]*)\}").expect("valid regex")
    })
}

fn ref_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\\(?:ref|eqref|autoref|cref|Cref)\s*\{([^}]*)\}").expect("valid regex"))
}

/// Environment name to segment type, from `\newtheorem` declarations first
/// (resolved by printed title, then by the environment name itself) and the
/// built-in names otherwise.
fn theorem_aliases(src: &str) -> HashMap<String, SegmentType> {
    newtheorem_re()
        .captures_iter(src)
        .filter_map(|c| {
            let env = c[1].trim().to_string();
            let printed = strip_markup(&c[2]);
            let kind = type_for_name(&printed)
                .or_else(|| printed.split_whitespace().find_map(type_for_name))
                .or_else(|| type_for_name(&env))?;
            Some((env, kind))
        })
        .collect()
}

/// Replaces every comment (unescaped `%` to end of line) with spaces,
/// keeping all byte offsets valid.
fn blank_comments(src: &str) -> String {
    let mut bytes = src.as_bytes().to_vec();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'%' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    bytes[i] = b' ';
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    // only whole UTF-8 sequences between ASCII delimiters were replaced
    String::from_utf8(bytes).unwrap_or_else(|_| src.to_string())
}

fn structure(offset: usize, message: impl Into<String>) -> DocumentError {
    DocumentError::Structure {
        offset,
        message: message.into(),
    }
}

fn decode(bytes: &[u8]) -> Result<&str, DocumentError> {
    std::str::from_utf8(bytes).map_err(|e| DocumentError::Encoding {
        offset: e.valid_up_to(),
    })
}

/// Body range: between `\begin{document}` and `\end{document}`, or the
/// whole input when there is no document environment.
fn body_range(src: &str) -> Result<Range<usize>, DocumentError> {
    const BEGIN: &str = "\\begin{document}";
    const END: &str = "\\end{document}";
    match src.find(BEGIN) {
        Some(b) => {
            let start = b + BEGIN.len();
            match src[start..].find(END) {
                Some(e) => Ok(start..start + e),
                None => Err(structure(b, "\\begin{document} is never closed")),
            }
        }
        None => match src.find(END) {
            Some(e) => Err(structure(e, "\\end{document} without \\begin{document}")),
            None => Ok(0..src.len()),
        },
    }
}

fn first_argument(src: &str, command: &str) -> Option<String> {
    all_arguments(src, command).into_iter().next()
}

/// Raw first brace argument of every occurrence of `\command`.
fn all_arguments(src: &str, command: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0;
    while let Some(pos) = src[i..].find('\\') {
        let at = i + pos;
        let (name, after) = read_command(src, at);
        i = after;
        if name != command {
            continue;
        }
        let mut j = skip_ws(src, after);
        if let Some((_, opt_end)) = read_optional(src, j) {
            j = skip_ws(src, opt_end);
        }
        if let Some((inner, end)) = read_group(src, j) {
            out.push(src[inner].to_string());
            i = end;
        }
    }
    out
}

fn environment_content<'a>(src: &'a str, env: &str) -> Option<&'a str> {
    let begin = format!("\\begin{{{env}}}");
    let end = format!("\\end{{{env}}}");
    let start = src.find(&begin)? + begin.len();
    let stop = src[start..].find(&end)?;
    Some(&src[start..start + stop])
}

fn split_authors(raw: &str) -> Vec<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\\and\b").expect("valid regex"));
    re.split(raw)
        .map(strip_markup)
        .map(|a| {
            a.trim_matches(|c: char| c == ',' || c.is_whitespace())
                .to_string()
        })
        .filter(|a| !a.is_empty())
        .collect()
}

fn detect_language(src: &str, body: &str) -> Lang {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\\usepackage\s*\[([^\]]*)\]\s*\{babel\}").expect("valid regex"));
    if let Some(c) = re.captures(src) {
        // babel's main language is the last option
        match c[1].split(',').map(str::trim).next_back() {
            Some("russian") => return Lang::Ru,
            Some("english") | Some("british") | Some("american") => return Lang::En,
            _ => {}
        }
    }
    let text = strip_markup(body);
    let cyrillic = text
        .chars()
        .filter(|c| ('\u{0400}'..='\u{04FF}').contains(c))
        .count();
    let latin = text.chars().filter(|c| c.is_ascii_alphabetic()).count();
    if cyrillic > latin {
        Lang::Ru
    } else {
        Lang::En
    }
}

fn metadata_of(src: &str, body: Range<usize>) -> Result<Metadata, DocumentError> {
    let title = first_argument(src, "title")
        .map(|t| strip_markup(&t))
        .filter(|t| !t.is_empty())
        .ok_or(DocumentError::MissingTitle)?;
    let authors = all_arguments(src, "author")
        .iter()
        .flat_map(|a| split_authors(a))
        .collect();
    let keywords = first_argument(src, "keywords")
        .map(|k| {
            strip_markup(&k)
                .split([',', ';'])
                .map(|w| w.trim().trim_end_matches('.').to_string())
                .filter(|w| !w.is_empty())
                .collect()
        })
        .unwrap_or_default();
    let abstract_text = environment_content(src, "abstract")
        .map(strip_markup)
        .filter(|a| !a.is_empty());
    Ok(Metadata {
        title,
        authors,
        abstract_text,
        keywords,
        language: detect_language(src, &src[body]),
        source_path: None,
    })
}

/// Bibliographic fields of a LaTeX article.
pub fn extract_metadata(latex: &str) -> Result<Metadata, DocumentError> {
    let src = blank_comments(latex);
    let body = body_range(&src)?;
    metadata_of(&src, body)
}

#[derive(Debug, Clone)]
enum Item {
    Text(Range<usize>),
    Formula(usize),
    Child(usize),
}

#[derive(Debug)]
struct Node {
    kind: SegmentType,
    title_raw: Option<String>,
    span: Range<usize>,
    items: Vec<Item>,
    /// 0 for the root, 1-3 for sectioning levels, `None` for environments.
    level: Option<u8>,
    env: Option<String>,
    label: Option<String>,
}

impl Node {
    fn new(kind: SegmentType, start: usize) -> Self {
        Node {
            kind,
            title_raw: None,
            span: start..start,
            items: Vec::new(),
            level: None,
            env: None,
            label: None,
        }
    }
}

struct RawFormula {
    tex: String,
    display: bool,
    span: Range<usize>,
}

enum Frame {
    Node(usize),
    /// An environment without a segment type (`itemize`, `center`, ...).
    Transparent(String, usize),
}

struct Scanner<'a> {
    src: &'a str,
    aliases: HashMap<String, SegmentType>,
    nodes: Vec<Node>,
    formulas: Vec<RawFormula>,
    stack: Vec<Frame>,
    text_start: usize,
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\\label\s*\{([^}]*)\}").expect("valid regex"))
}

/// TeX of one display row without labels, tags, alignment marks and
/// trailing punctuation; also returns the first label.
fn clean_formula_tex(raw: &str) -> (String, Option<String>) {
    static STRIP: OnceLock<Regex> = OnceLock::new();
    let strip = STRIP.get_or_init(|| {
        Regex::new(
            r"\\(?:nonumber|notag)\b|\\tag\*?\s*\{[^}]*\}|\\(?:begin|end)\s*\{(?:split|aligned|gathered)\}",
        )
        .expect("valid regex")
    });
    let label = label_re().captures(raw).map(|c| c[1].trim().to_string());
    let text = label_re().replace_all(raw, " ");
    let text = strip.replace_all(&text, " ").replace('&', " ");
    let mut text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let trimmed = text
            .trim_end_matches(|c: char| matches!(c, '.' | ',' | ';') || c.is_whitespace())
            .trim_end_matches("\\\\")
            .trim_end_matches("\\,")
            .trim_end_matches("\\;")
            .trim_end_matches("\\quad")
            .to_string();
        if trimmed == text {
            break;
        }
        text = trimmed;
    }
    (text, label)
}

/// Row ranges of an alignment body split at `\\`.
fn split_rows(src: &str, range: Range<usize>) -> Vec<Range<usize>> {
    let mut rows = Vec::new();
    let mut start = range.start;
    let mut i = range.start;
    let b = src.as_bytes();
    let mut depth = 0usize;
    while i < range.end {
        match b[i] {
            b'\\' if b.get(i + 1) == Some(&b'\\') && depth == 0 => {
                rows.push(start..i);
                i += 2;
                start = i;
                continue;
            }
            b'\\' => i += 1,
            b'{' => depth += 1,
            b'}' => depth = depth.saturating_sub(1),
            _ => {}
        }
        i += 1;
    }
    rows.push(start..range.end);
    rows
}

impl<'a> Scanner<'a> {
    fn current(&self) -> usize {
        self.stack
            .iter()
            .rev()
            .find_map(|f| match f {
                Frame::Node(n) => Some(*n),
                Frame::Transparent(..) => None,
            })
            .unwrap_or(0)
    }

    fn flush(&mut self, end: usize) {
        if end > self.text_start {
            let node = self.current();
            self.nodes[node].items.push(Item::Text(self.text_start..end));
        }
        self.text_start = end;
    }

    fn add_child(&mut self, node: Node) -> usize {
        let parent = self.current();
        let index = self.nodes.len();
        self.nodes.push(node);
        self.nodes[parent].items.push(Item::Child(index));
        index
    }

    fn add_formula(&mut self, node: usize, tex: String, display: bool, span: Range<usize>) {
        let index = self.formulas.len();
        self.formulas.push(RawFormula { tex, display, span });
        self.nodes[node].items.push(Item::Formula(index));
    }

    fn only_sections_open(&self) -> bool {
        self.stack
            .iter()
            .all(|f| matches!(f, Frame::Node(n) if self.nodes[*n].level.is_some()))
    }

    fn scan(&mut self, body: Range<usize>) -> Result<(), DocumentError> {
        let src = self.src;
        let b = src.as_bytes();
        let mut i = body.start;
        self.text_start = i;
        while i < body.end {
            match b[i] {
                b'\\' => i = self.command(i, body.end)?,
                b'$' => {
                    let display = b.get(i + 1) == Some(&b'$');
                    let (open, close) = if display { (2, "$$") } else { (1, "$") };
                    let end = find_unescaped(src, i + open, close)
                        .filter(|&e| e < body.end)
                        .ok_or_else(|| structure(i, format!("unclosed math delimiter {close}")))?;
                    self.flush(i);
                    let node = self.current();
                    let (tex, _) = clean_formula_tex(&src[i + open..end]);
                    self.add_formula(node, tex, display, i..end + open);
                    i = end + open;
                    self.text_start = i;
                }
                _ => i += 1,
            }
        }
        self.flush(body.end);
        while let Some(frame) = self.stack.pop() {
            match frame {
                Frame::Node(n) if self.nodes[n].level.is_some() => self.nodes[n].span.end = body.end,
                Frame::Node(n) => {
                    let env = self.nodes[n].env.clone().unwrap_or_default();
                    return Err(structure(
                        self.nodes[n].span.start,
                        format!("\\begin{{{env}}} is never closed"),
                    ));
                }
                Frame::Transparent(env, at) => {
                    return Err(structure(at, format!("\\begin{{{env}}} is never closed")));
                }
            }
        }
        Ok(())
    }

    fn command(&mut self, i: usize, limit: usize) -> Result<usize, DocumentError> {
        let src = self.src;
        let (name, after) = read_command(src, i);
        match name {
            "begin" => self.begin(i, after, limit),
            "end" => self.end(i, after),
            "[" | "(" => {
                let close = if name == "[" { "\\]" } else { "\\)" };
                let end = src[after..limit]
                    .find(close)
                    .map(|e| after + e)
                    .ok_or_else(|| structure(i, format!("unclosed math delimiter {close}")))?;
                self.flush(i);
                let node = self.current();
                let (tex, _) = clean_formula_tex(&src[after..end]);
                self.add_formula(node, tex, name == "[", i..end + 2);
                self.text_start = end + 2;
                Ok(end + 2)
            }
            _ => match SECTION_COMMANDS.iter().find(|(n, _)| *n == name) {
                Some(&(_, level)) if self.only_sections_open() => Ok(self.section(i, after, level)),
                _ => Ok(after),
            },
        }
    }

    fn section(&mut self, i: usize, after: usize, level: u8) -> usize {
        let src = self.src;
        let mut j = after;
        if src.as_bytes().get(j) == Some(&b'*') {
            j += 1;
        }
        j = skip_ws(src, j);
        if let Some((_, opt_end)) = read_optional(src, j) {
            j = skip_ws(src, opt_end);
        }
        let Some((title, end)) = read_group(src, j) else {
            return after;
        };
        self.flush(i);
        while let Some(Frame::Node(n)) = self.stack.last() {
            let n = *n;
            match self.nodes[n].level {
                Some(l) if l >= level => {
                    self.nodes[n].span.end = i;
                    self.stack.pop();
                }
                _ => break,
            }
        }
        let mut node = Node::new(SegmentType::DocumentSegment, i);
        node.level = Some(level);
        node.title_raw = Some(src[title].to_string());
        let index = self.add_child(node);
        self.stack.push(Frame::Node(index));
        self.text_start = end;
        end
    }

    fn begin(&mut self, i: usize, after: usize, limit: usize) -> Result<usize, DocumentError> {
        let src = self.src;
        let Some((env, after_env)) = read_group(src, skip_ws(src, after)) else {
            return Ok(after);
        };
        let env = src[env].trim().to_string();
        let closing = format!("\\end{{{env}}}");
        let find_end = || {
            src[after_env..limit]
                .find(&closing)
                .map(|e| after_env + e)
                .ok_or_else(|| structure(i, format!("\\begin{{{env}}} is never closed")))
        };

        if EQUATION_ENVS.contains(&env.as_str()) {
            let end = find_end()?;
            self.flush(i);
            let mut node = Node::new(SegmentType::Equation, i);
            node.span.end = end + closing.len();
            node.env = Some(env.clone());
            let index = self.add_child(node);
            let rows = if env.starts_with("multline") || env.starts_with("equation") {
                std::iter::once(after_env..end).collect()
            } else {
                split_rows(src, after_env..end)
            };
            for row in rows {
                let (tex, label) = clean_formula_tex(&src[row.clone()]);
                if self.nodes[index].label.is_none() {
                    self.nodes[index].label = label;
                }
                if !tex.is_empty() {
                    let tex = if env.starts_with("multline") {
                        tex.replace("\\\\", " ")
                    } else {
                        tex
                    };
                    self.add_formula(index, tex, true, row);
                }
            }
            self.text_start = end + closing.len();
            return Ok(self.text_start);
        }
        if DISPLAY_ENVS.contains(&env.as_str()) {
            let end = find_end()?;
            self.flush(i);
            let node = self.current();
            let (tex, _) = clean_formula_tex(&src[after_env..end]);
            self.add_formula(node, tex, env == "displaymath", i..end + closing.len());
            self.text_start = end + closing.len();
            return Ok(self.text_start);
        }
        if OPAQUE_ENVS.contains(&env.as_str()) {
            let end = find_end()?;
            self.flush(i);
            self.text_start = end + closing.len();
            return Ok(self.text_start);
        }
        let kind = self
            .aliases
            .get(&env)
            .or_else(|| self.aliases.get(env.trim_end_matches('*')))
            .copied()
            .or_else(|| type_for_name(&env));
        match kind {
            Some(kind) => {
                self.flush(i);
                let mut node = Node::new(kind, i);
                node.env = Some(env);
                let mut content = after_env;
                if let Some((title, end)) = read_optional(src, after_env) {
                    node.title_raw = Some(src[title].to_string());
                    content = end;
                }
                let index = self.add_child(node);
                self.stack.push(Frame::Node(index));
                self.text_start = content;
                Ok(content)
            }
            None => {
                self.stack.push(Frame::Transparent(env, i));
                Ok(after_env)
            }
        }
    }

    fn end(&mut self, i: usize, after: usize) -> Result<usize, DocumentError> {
        let src = self.src;
        let Some((env, end)) = read_group(src, skip_ws(src, after)) else {
            return Ok(after);
        };
        let env = src[env].trim();
        match self.stack.last() {
            Some(Frame::Transparent(open, _)) if open == env => {
                self.stack.pop();
                Ok(end)
            }
            Some(Frame::Node(n)) if self.nodes[*n].env.as_deref() == Some(env) => {
                let n = *n;
                self.flush(i);
                self.nodes[n].span.end = end;
                self.stack.pop();
                self.text_start = end;
                Ok(end)
            }
            Some(Frame::Transparent(open, _)) => Err(structure(
                i,
                format!("\\end{{{env}}} does not match \\begin{{{open}}}"),
            )),
            Some(Frame::Node(n)) if self.nodes[*n].env.is_some() => Err(structure(
                i,
                format!(
                    "\\end{{{env}}} does not match \\begin{{{}}}",
                    self.nodes[*n].env.as_deref().unwrap_or_default()
                ),
            )),
            _ => Err(structure(i, format!("\\end{{{env}}} without matching \\begin"))),
        }
    }

    /// Wraps top-level runs of text and math that carry content into
    /// untitled `DocumentSegment`s.
    fn wrap_top_level_runs(&mut self) {
        let items = std::mem::take(&mut self.nodes[0].items);
        let mut result = Vec::new();
        let mut run: Vec<Item> = Vec::new();
        for item in items.into_iter().chain(std::iter::once(Item::Child(usize::MAX))) {
            match item {
                Item::Child(c) => {
                    if !run.is_empty() {
                        let run = std::mem::take(&mut run);
                        if self.run_has_content(&run) {
                            let span = self.run_span(&run);
                            let mut node = Node::new(SegmentType::DocumentSegment, span.start);
                            node.span = span;
                            node.items = run;
                            let index = self.nodes.len();
                            self.nodes.push(node);
                            result.push(Item::Child(index));
                        } else {
                            result.extend(run);
                        }
                    }
                    if c != usize::MAX {
                        result.push(Item::Child(c));
                    }
                }
                other => run.push(other),
            }
        }
        self.nodes[0].items = result;
    }

    fn run_has_content(&self, run: &[Item]) -> bool {
        run.iter().any(|item| match item {
            Item::Formula(_) => true,
            Item::Text(r) => !strip_markup(&self.src[r.clone()]).is_empty(),
            Item::Child(_) => false,
        })
    }

    fn run_span(&self, run: &[Item]) -> Range<usize> {
        let range = |item: &Item| match item {
            Item::Text(r) => r.clone(),
            Item::Formula(f) => self.formulas[*f].span.clone(),
            Item::Child(c) => self.nodes[*c].span.clone(),
        };
        let start = run.first().map(|i| range(i).start).unwrap_or(0);
        let end = run.last().map(|i| range(i).end).unwrap_or(start);
        let text = &self.src[start..end];
        let lead = text.len() - text.trim_start().len();
        let trail = text.len() - text.trim_end().len();
        start + lead..end - trail
    }
}

/// Parses a LaTeX article into typed segments, formulas and relations.
///
/// Segment ids are `<doc_id>#s<n>` in document order with the whole article
/// as `s0`; formula ids are `<doc_id>#f<n>` numbered from 1. A missing
/// `\title` falls back to `doc_id`.
pub fn parse_document(latex: impl AsRef<[u8]>, doc_id: &str) -> Result<MathDocument, DocumentError> {
    let original = decode(latex.as_ref())?;
    let src = blank_comments(original);
    let body = body_range(&src)?;
    let metadata = match metadata_of(&src, body.clone()) {
        Ok(m) => m,
        Err(DocumentError::MissingTitle) => Metadata {
            title: doc_id.to_string(),
            authors: Vec::new(),
            abstract_text: None,
            keywords: Vec::new(),
            language: detect_language(&src, &src[body.clone()]),
            source_path: None,
        },
        Err(e) => return Err(e),
    };

    let mut root = Node::new(SegmentType::Document, body.start);
    root.span = body.clone();
    root.level = Some(0);
    let mut scanner = Scanner {
        src: &src,
        aliases: theorem_aliases(&src),
        nodes: vec![root],
        formulas: Vec::new(),
        stack: vec![Frame::Node(0)],
        text_start: body.start,
    };
    scanner.scan(body)?;
    scanner.wrap_top_level_runs();

    // pre-order numbering
    let mut order = Vec::new();
    let mut parent_of = HashMap::new();
    let mut pending = vec![0usize];
    while let Some(n) = pending.pop() {
        order.push(n);
        let children: Vec<usize> = scanner.nodes[n]
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Child(c) => Some(*c),
                _ => None,
            })
            .collect();
        for &c in children.iter().rev() {
            parent_of.insert(c, n);
            pending.push(c);
        }
    }
    let number_of: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &n)| (n, k)).collect();

    let mut segments = Vec::with_capacity(order.len());
    let mut parents = Vec::with_capacity(order.len());
    let mut refs = Vec::new();
    let mut title_refs = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    for (number, &n) in order.iter().enumerate() {
        let node = &scanner.nodes[n];
        let mut builder = TextBuilder::default();
        let mut formulas = Vec::new();
        if n == 0 {
            builder.push_str(&metadata.title);
            if let Some(a) = &metadata.abstract_text {
                builder.push_str(". ");
                builder.push_str(a);
            }
        }
        for item in &node.items {
            match item {
                Item::Text(r) => builder.convert(&src[r.clone()]),
                Item::Child(_) => builder.push_char(' '),
                Item::Formula(f) => {
                    let raw = &scanner.formulas[*f];
                    builder.push_char(' ');
                    builder.push_str(&placeholder(f + 1));
                    builder.push_char(' ');
                    let parsed = parse_tex_formula(&raw.tex);
                    formulas.push(Formula {
                        id: format!("{doc_id}#f{}", f + 1),
                        tex: raw.tex.clone(),
                        display: raw.display,
                        error: parsed.as_ref().err().map(|e| e.to_string()),
                        ast: parsed.ok(),
                        span: raw.span.clone(),
                    });
                }
            }
        }
        let (text, seg_refs, seg_labels) = builder.finish();
        let label = node.label.clone().or_else(|| seg_labels.first().cloned());
        for key in node.label.iter().chain(seg_labels.iter()) {
            labels.entry(key.clone()).or_insert(number);
        }
        refs.extend(seg_refs.into_iter().map(|(key, offset)| RefSite {
            segment: number,
            key,
            offset,
        }));
        title_refs.push(
            node.title_raw
                .as_deref()
                .map(|t| {
                    ref_re()
                        .captures_iter(t)
                        .map(|c| c[1].trim().to_string())
                        .collect()
                })
                .unwrap_or_default(),
        );
        let title = if n == 0 {
            Some(metadata.title.clone())
        } else {
            node.title_raw
                .as_deref()
                .map(strip_markup)
                .filter(|t| !t.is_empty())
        };
        parents.push(parent_of.get(&n).map(|p| number_of[p]));
        segments.push(Segment {
            id: format!("{doc_id}#s{number}"),
            segment_type: node.kind,
            title,
            label,
            text,
            formulas,
            span: node.span.clone(),
        });
    }

    let relations = derive_relations(RelationInput {
        segments: &segments,
        parents: &parents,
        labels: &labels,
        refs: &refs,
        title_refs: &title_refs,
    });
    Ok(MathDocument {
        id: doc_id.to_string(),
        metadata,
        segments,
        relations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::{SegmentRelation, SegmentRelationKind as K};

    fn has(doc: &MathDocument, src: usize, kind: K, dst: usize) -> bool {
        doc.relations.contains(&SegmentRelation {
            src: format!("{}#s{src}", doc.id),
            kind,
            dst: format!("{}#s{dst}", doc.id),
        })
    }

    const THEOREM_AND_PROOF: &str = r"\documentclass{article}
\title{T}
\begin{document}
\begin{theorem}\label{t1} Every $n$ is fine. \end{theorem}
\begin{proof}[Proof of Theorem \ref{t1}] Trivial. \end{proof}
\end{document}";

    #[test]
    fn theorem_and_proof() {
        let doc = parse_document(THEOREM_AND_PROOF, "d1").unwrap();
        let types: Vec<_> = doc.segments.iter().map(|s| s.segment_type).collect();
        assert_eq!(
            types,
            [SegmentType::Document, SegmentType::Theorem, SegmentType::Proof]
        );
        assert!(has(&doc, 2, K::Proves, 1));
        assert!(has(&doc, 0, K::HasSegment, 1));
        assert!(has(&doc, 0, K::HasSegment, 2));
        assert_eq!(doc.segments[1].label.as_deref(), Some("t1"));
        assert_eq!(doc.segments[1].text, "Every [[f1]] is fine.");
        assert_eq!(doc.segments[2].title.as_deref(), Some("Proof of Theorem [t1]"));
        doc.check().unwrap();
    }

    #[test]
    fn empty_body() {
        let doc = parse_document("\\title{T}\\begin{document}\\end{document}", "e").unwrap();
        assert_eq!(doc.segments.len(), 1);
        assert_eq!(doc.root().segment_type, SegmentType::Document);
        assert!(doc.relations.is_empty());
        assert_eq!(doc.metadata.title, "T");
    }

    #[test]
    fn equation_reference() {
        let src = r"\title{T}\begin{document}
\begin{equation}\label{eq:1} E = m c^2 \end{equation}
\begin{proof} Immediate from \ref{eq:1}. \end{proof}
\end{document}";
        let doc = parse_document(src, "d").unwrap();
        assert_eq!(doc.segments[1].segment_type, SegmentType::Equation);
        assert_eq!(doc.segments[1].label.as_deref(), Some("eq:1"));
        assert_eq!(doc.segments[1].formulas[0].tex, "E = m c^2");
        assert!(doc.segments[1].formulas[0].is_parsed());
        assert!(has(&doc, 2, K::RefersTo, 1));
        assert!(has(&doc, 2, K::DependsOn, 1));
        doc.check().unwrap();
    }

    #[test]
    fn metadata_fields() {
        let src = r"\title{On \emph{Curves}}
\author{A. Author \and B. Writer\thanks{grant}}
\keywords{curvature, surfaces; geodesics}
\begin{document}\begin{abstract}We study $K$.\end{abstract}\end{document}";
        let m = extract_metadata(src).unwrap();
        assert_eq!(m.title, "On Curves");
        assert_eq!(m.authors, ["A. Author", "B. Writer"]);
        assert_eq!(m.keywords, ["curvature", "surfaces", "geodesics"]);
        assert_eq!(m.abstract_text.as_deref(), Some("We study K."));
        assert_eq!(m.language, Lang::En);

        let bare = extract_metadata("\\title{X}\\begin{document}x\\end{document}").unwrap();
        assert!(bare.keywords.is_empty());
        assert!(bare.authors.is_empty());
        assert_eq!(
            extract_metadata("\\begin{document}\\end{document}"),
            Err(DocumentError::MissingTitle)
        );
    }

    #[test]
    fn missing_title_falls_back_to_id() {
        let doc = parse_document("\\begin{document}text\\end{document}", "x9").unwrap();
        assert_eq!(doc.metadata.title, "x9");
    }

    #[test]
    fn russian_detection() {
        let src =
            "\\usepackage[english,russian]{babel}\\title{Кривизна}\\begin{document}Текст\\end{document}";
        assert_eq!(extract_metadata(src).unwrap().language, Lang::Ru);
        let plain = "\\title{К}\\begin{document}Гауссова кривизна поверхности\\end{document}";
        assert_eq!(extract_metadata(plain).unwrap().language, Lang::Ru);
    }

    #[test]
    fn structure_errors() {
        let unbalanced = "\\title{T}\\begin{document}\\begin{theorem} x \\end{lemma}\\end{document}";
        assert!(matches!(
            parse_document(unbalanced, "d"),
            Err(DocumentError::Structure { offset: 43, .. })
        ));
        let unclosed = "\\title{T}\\begin{document}\\begin{theorem} x \\end{document}";
        assert!(matches!(
            parse_document(unclosed, "d"),
            Err(DocumentError::Structure { offset: 25, .. })
        ));
        assert!(matches!(
            parse_document("\\title{T}\\begin{document} $x \\end{document}", "d"),
            Err(DocumentError::Structure { .. })
        ));
        assert_eq!(
            parse_document([b'a', 0xff, b'b'], "d"),
            Err(DocumentError::Encoding { offset: 1 })
        );
    }

    #[test]
    fn sections_and_top_level_text() {
        let src = r"\title{T}\begin{document}
\maketitle
Intro text with $x$.
\section{Basics}\label{sec:b}
Some words.
\subsection{Deeper}
\begin{lemma}\label{l1} $a=b$ \end{lemma}
\section{More}
By Lemma~\ref{l1} we get $c$. Hence \ref{sec:b} holds.
\end{document}";
        let doc = parse_document(src, "d").unwrap();
        let summary: Vec<_> = doc
            .segments
            .iter()
            .map(|s| (s.segment_type, s.title.clone().unwrap_or_default()))
            .collect();
        assert_eq!(
            summary,
            [
                (SegmentType::Document, "T".to_string()),
                (SegmentType::DocumentSegment, String::new()),
                (SegmentType::DocumentSegment, "Basics".to_string()),
                (SegmentType::DocumentSegment, "Deeper".to_string()),
                (SegmentType::Lemma, String::new()),
                (SegmentType::DocumentSegment, "More".to_string()),
            ]
        );
        assert_eq!(doc.segments[1].text, "Intro text with [[f1]] .");
        assert!(has(&doc, 2, K::HasSegment, 3));
        assert!(has(&doc, 3, K::HasSegment, 4));
        assert!(has(&doc, 5, K::DependsOn, 4));
        assert!(has(&doc, 5, K::HasConsequence, 2));
        assert_eq!(doc.segments[2].label.as_deref(), Some("sec:b"));
        doc.check().unwrap();
    }

    #[test]
    fn newtheorem_aliases_and_align_rows() {
        let src = r"\newtheorem{thm}{Theorem}
\newtheorem{utv}{Утверждение}
\newtheorem{xyz}{Следствие}[section]
\title{T}\begin{document}
\begin{thm} A \end{thm}
\begin{utv} B \end{utv}
\begin{xyz} C \end{xyz}
\begin{proof} D \end{proof}
\begin{align} a &= b \\ c &= d. \end{align}
\end{document}";
        let doc = parse_document(src, "d").unwrap();
        let types: Vec<_> = doc.segments.iter().skip(1).map(|s| s.segment_type).collect();
        assert_eq!(
            types,
            [
                SegmentType::Theorem,
                SegmentType::Claim,
                SegmentType::Corollary,
                SegmentType::Proof,
                SegmentType::Equation
            ]
        );
        // proof without a title proves the nearest preceding provable segment
        assert!(has(&doc, 4, K::Proves, 3));
        let eq = &doc.segments[5];
        let tex: Vec<_> = eq.formulas.iter().map(|f| f.tex.as_str()).collect();
        assert_eq!(tex, ["a = b", "c = d"]);
        assert_eq!(eq.text, "[[f1]] [[f2]]");
        doc.check().unwrap();
    }

    #[test]
    fn comments_are_ignored() {
        let src = "\\title{T}\\begin{document}% \\begin{theorem}\nText 50\\% done\\end{document}";
        let doc = parse_document(src, "d").unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(doc.segments[1].text, "Text 50% done");
    }

    #[test]
    fn unparsable_formula_is_kept() {
        let src = "\\title{T}\\begin{document}$\\frac{a}$ and $x$\\end{document}";
        let doc = parse_document(src, "d").unwrap();
        let formulas: Vec<_> = doc.formulas().map(|(_, f)| f).collect();
        assert_eq!(formulas.len(), 2);
        assert!(!formulas[0].is_parsed());
        assert!(formulas[0].error.is_some());
        assert!(formulas[1].is_parsed());
    }

    #[test]
    fn example_segments_exemplify() {
        let src = r"\title{T}\begin{document}
\begin{definition}\label{d1} A polygon. \end{definition}
\begin{example} A triangle, see \ref{d1}. \end{example}
\end{document}";
        let doc = parse_document(src, "d").unwrap();
        assert!(has(&doc, 2, K::Exemplifies, 1));
        assert!(has(&doc, 2, K::RefersTo, 1));
    }
}
