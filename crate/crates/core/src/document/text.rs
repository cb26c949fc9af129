//! LaTeX-to-plain-text conversion and small lexing helpers shared by the
//! document scanner.

use std::ops::Range;

/// Commands removed together with their arguments, with the number of
/// mandatory brace groups each takes.
const DROPPED: &[(&str, usize)] = &[
    ("title", 1),
    ("author", 1),
    ("date", 1),
    ("keywords", 1),
    ("thanks", 1),
    ("email", 1),
    ("address", 1),
    ("affiliation", 1),
    ("institute", 1),
    ("udc", 1),
    ("maketitle", 0),
    ("tableofcontents", 0),
    ("newtheorem", 2),
    ("usepackage", 1),
    ("documentclass", 1),
    ("includegraphics", 1),
    ("vspace", 1),
    ("hspace", 1),
    ("bibliographystyle", 1),
    ("bibliography", 1),
    ("bibitem", 1),
    ("cite", 1),
    ("citep", 1),
    ("citet", 1),
    ("pagestyle", 1),
    ("setcounter", 2),
    ("newcommand", 2),
    ("renewcommand", 2),
    ("selectlanguage", 1),
];

const REF_COMMANDS: &[&str] = &["ref", "eqref", "autoref", "cref", "Cref", "pageref"];

pub(crate) fn is_ref_command(name: &str) -> bool {
    REF_COMMANDS.contains(&name)
}

pub(crate) fn skip_ws(src: &str, mut i: usize) -> usize {
    let b = src.as_bytes();
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

/// Reads the command starting at the backslash at `i`; returns its name and
/// the offset after it. Letter commands consume letters only; any other
/// command is one character long.
pub(crate) fn read_command(src: &str, i: usize) -> (&str, usize) {
    let start = i + 1;
    let rest = &src[start..];
    let letters = rest.bytes().take_while(|c| c.is_ascii_alphabetic()).count();
    if letters > 0 {
        return (&src[start..start + letters], start + letters);
    }
    match rest.chars().next() {
        Some(c) => (&src[start..start + c.len_utf8()], start + c.len_utf8()),
        None => ("", start),
    }
}

/// Balanced group delimited by `open`/`close` at `i`; escaped delimiters do
/// not count. Returns the inner range and the offset after the closer.
fn read_delimited(src: &str, i: usize, open: u8, close: u8) -> Option<(Range<usize>, usize)> {
    let b = src.as_bytes();
    if b.get(i) != Some(&open) {
        return None;
    }
    let mut depth = 0usize;
    let mut braces = 0usize;
    let mut j = i;
    while j < b.len() {
        match b[j] {
            b'\\' => {
                j += 2;
                continue;
            }
            b'{' if open != b'{' => braces += 1,
            b'}' if open != b'{' => braces = braces.saturating_sub(1),
            c if c == open && braces == 0 => depth += 1,
            c if c == close && braces == 0 => {
                depth -= 1;
                if depth == 0 {
                    return Some((i + 1..j, j + 1));
                }
            }
            _ => {}
        }
        j += 1;
    }
    None
}

pub(crate) fn read_group(src: &str, i: usize) -> Option<(Range<usize>, usize)> {
    read_delimited(src, i, b'{', b'}')
}

pub(crate) fn read_optional(src: &str, i: usize) -> Option<(Range<usize>, usize)> {
    read_delimited(src, i, b'[', b']')
}

/// Skips an optional `*`, any `[...]` options and `groups` brace groups
/// following a command name.
fn skip_arguments(src: &str, mut i: usize, groups: usize) -> usize {
    if src.as_bytes().get(i) == Some(&b'*') {
        i += 1;
    }
    for _ in 0..groups {
        let mut j = skip_ws(src, i);
        while let Some((_, after)) = read_optional(src, j) {
            j = skip_ws(src, after);
        }
        match read_group(src, j) {
            Some((_, after)) => i = after,
            None => return j,
        }
    }
    i
}

/// Accumulates plain text with collapsed whitespace, recording `\ref` sites
/// (as character offsets into the output) and `\label` keys.
#[derive(Debug, Default)]
pub(crate) struct TextBuilder {
    out: String,
    chars: usize,
    pub refs: Vec<(String, usize)>,
    pub labels: Vec<String>,
}

impl TextBuilder {
    pub fn push_char(&mut self, c: char) {
        if c.is_whitespace() {
            if self.out.is_empty() || self.out.ends_with(' ') {
                return;
            }
            self.out.push(' ');
        } else {
            self.out.push(c);
        }
        self.chars += 1;
    }

    pub fn push_str(&mut self, s: &str) {
        for c in s.chars() {
            self.push_char(c);
        }
    }

    pub fn finish(mut self) -> (String, Vec<(String, usize)>, Vec<String>) {
        if self.out.ends_with(' ') {
            self.out.pop();
        }
        (self.out, self.refs, self.labels)
    }

    /// Appends the plain-text rendering of a LaTeX fragment.
    pub fn convert(&mut self, src: &str) {
        let b = src.as_bytes();
        let mut i = 0;
        while i < b.len() {
            match b[i] {
                b'\\' => i = self.command(src, i),
                b'{' | b'}' => i += 1,
                b'~' => {
                    self.push_char(' ');
                    i += 1;
                }
                b'$' => {
                    // math left in metadata fields is kept as its TeX source
                    let display = b.get(i + 1) == Some(&b'$');
                    let open = if display { 2 } else { 1 };
                    let close = find_unescaped(src, i + open, if display { "$$" } else { "$" });
                    match close {
                        Some(end) => {
                            self.push_str(src[i + open..end].trim());
                            i = end + open;
                        }
                        None => i += open,
                    }
                }
                b'-' if src[i..].starts_with("---") => {
                    self.push_char('—');
                    i += 3;
                }
                b'-' if src[i..].starts_with("--") => {
                    self.push_char('–');
                    i += 2;
                }
                b'`' if src[i..].starts_with("``") => {
                    self.push_char('"');
                    i += 2;
                }
                b'\'' if src[i..].starts_with("''") => {
                    self.push_char('"');
                    i += 2;
                }
                _ => {
                    let c = src[i..].chars().next().unwrap_or(' ');
                    self.push_char(c);
                    i += c.len_utf8();
                }
            }
        }
    }

    fn command(&mut self, src: &str, i: usize) -> usize {
        let (name, after) = read_command(src, i);
        if let Some(&(_, groups)) = DROPPED.iter().find(|(n, _)| *n == name) {
            return skip_arguments(src, after, groups);
        }
        if name == "label" || is_ref_command(name) {
            let j = skip_ws(src, after);
            let Some((key, end)) = read_group(src, j) else {
                return after;
            };
            let key = src[key].trim().to_string();
            if name == "label" {
                self.labels.push(key);
            } else {
                self.refs.push((key.clone(), self.chars));
                self.push_str(&format!("[{key}]"));
            }
            return end;
        }
        match name {
            "begin" | "end" => {
                let j = skip_ws(src, after);
                match read_group(src, j) {
                    Some((_, mut end)) => {
                        if name == "begin" {
                            if let Some((_, opt_end)) = read_optional(src, end) {
                                end = opt_end;
                            }
                        }
                        self.push_char(' ');
                        end
                    }
                    None => after,
                }
            }
            "\\" | "," | ";" | ":" | "!" | " " | "quad" | "qquad" | "newline" | "par" | "item"
            | "noindent" | "medskip" | "smallskip" | "bigskip" => {
                self.push_char(' ');
                after
            }
            "%" | "$" | "&" | "#" | "_" | "{" | "}" => {
                self.push_str(name);
                after
            }
            "ldots" | "dots" => {
                self.push_char('…');
                after
            }
            "S" => {
                self.push_char('§');
                after
            }
            _ => after,
        }
    }
}

/// Offset of the next occurrence of `needle` at or after `from` that is not
/// preceded by a backslash.
pub(crate) fn find_unescaped(src: &str, from: usize, needle: &str) -> Option<usize> {
    let mut j = from;
    while let Some(pos) = src.get(j..)?.find(needle) {
        let at = j + pos;
        let escaped = src[..at].bytes().rev().take_while(|&c| c == b'\\').count() % 2 == 1;
        if !escaped {
            return Some(at);
        }
        j = at + needle.len();
    }
    None
}

/// Plain text of a LaTeX fragment with whitespace collapsed.
pub fn strip_markup(latex: &str) -> String {
    let mut builder = TextBuilder::default();
    builder.convert(latex);
    builder.finish().0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_common_markup() {
        assert_eq!(
            strip_markup("The \\emph{curvature}  of~a \\textbf{curve}"),
            "The curvature of a curve"
        );
        assert_eq!(strip_markup("x\\thanks{funded} y"), "x y");
        assert_eq!(strip_markup("area $S=\\pi r^2$ here"), "area S=\\pi r^2 here");
        assert_eq!(strip_markup("где $K$ --- кривизна"), "где K — кривизна");
        assert_eq!(strip_markup("50\\% of \\ldots"), "50% of …");
    }

    #[test]
    fn records_refs_and_labels() {
        let mut b = TextBuilder::default();
        b.convert("By Theorem~\\ref{t1}, \\label{x} done");
        let (text, refs, labels) = b.finish();
        assert_eq!(text, "By Theorem [t1], done");
        assert_eq!(refs, vec![("t1".to_string(), 11)]);
        assert_eq!(labels, vec!["x".to_string()]);
    }

    #[test]
    fn groups_and_commands() {
        let src = "\\section*[s]{A {b} c} rest";
        let (name, after) = read_command(src, 0);
        assert_eq!(name, "section");
        assert_eq!(skip_arguments(src, after, 1), 21);
        assert_eq!(read_optional("[Proof of \\ref{t]1}] x", 0).unwrap().1, 20);
        assert_eq!(find_unescaped("a\\$b$c", 0, "$"), Some(4));
    }
}
