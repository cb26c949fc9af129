use std::fmt::Write;

use super::{Term, Triple, TripleSet, RDF_TYPE};

fn escape_literal(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// `<iri>` with characters IRIREF forbids written as `\u` escapes.
fn write_iri(iri: &str, out: &mut String) {
    out.push('<');
    for c in iri.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

fn write_literal(value: &str, lang: Option<&str>, out: &mut String) {
    out.push('"');
    escape_literal(value, out);
    out.push('"');
    if let Some(lang) = lang {
        out.push('@');
        out.push_str(lang);
    }
}

pub(super) fn term_ntriples(term: &Term) -> String {
    let mut out = String::new();
    match term {
        Term::Iri(iri) => write_iri(iri, &mut out),
        Term::Literal { value, lang } => write_literal(value, lang.as_deref(), &mut out),
    }
    out
}

pub(super) fn triple_line(t: &Triple) -> String {
    let mut out = String::new();
    write_iri(&t.subject, &mut out);
    out.push(' ');
    write_iri(&t.predicate, &mut out);
    out.push(' ');
    out.push_str(&term_ntriples(&t.object));
    out.push_str(" .");
    out
}

/// One triple per line in set order; empty set gives empty output.
pub fn serialize_ntriples(ts: &TripleSet) -> Vec<u8> {
    let mut out = String::new();
    for t in ts.triples() {
        out.push_str(&triple_line(t));
        out.push('\n');
    }
    out.into_bytes()
}

/// Prefixed name for `iri` when a namespace covers it and the local part is
/// a plain name.
fn prefixed(iri: &str, ts: &TripleSet) -> Option<String> {
    ts.namespaces().iter().find_map(|(prefix, ns)| {
        let local = iri.strip_prefix(ns.as_str())?;
        let mut chars = local.chars();
        let plain = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        plain.then(|| format!("{prefix}:{local}"))
    })
}

fn turtle_iri(iri: &str, ts: &TripleSet, out: &mut String) {
    match prefixed(iri, ts) {
        Some(name) => out.push_str(&name),
        None => write_iri(iri, out),
    }
}

/// `@prefix` block followed by one block per subject, predicates separated
/// by `;` and objects of one predicate by `,`.
pub fn serialize_turtle(ts: &TripleSet) -> Vec<u8> {
    let mut out = String::new();
    if ts.is_empty() {
        return Vec::new();
    }
    for (prefix, ns) in ts.namespaces() {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    let triples = ts.triples();
    let mut i = 0;
    while i < triples.len() {
        let subject = &triples[i].subject;
        out.push('\n');
        turtle_iri(subject, ts, &mut out);
        let mut first_predicate = true;
        while i < triples.len() && &triples[i].subject == subject {
            let predicate = &triples[i].predicate;
            out.push_str(if first_predicate { " " } else { " ;\n    " });
            first_predicate = false;
            if predicate == RDF_TYPE {
                out.push('a');
            } else {
                turtle_iri(predicate, ts, &mut out);
            }
            let mut first_object = true;
            while i < triples.len() && &triples[i].subject == subject && &triples[i].predicate == predicate {
                out.push_str(if first_object { " " } else { " ,\n        " });
                first_object = false;
                match &triples[i].object {
                    Term::Iri(iri) => turtle_iri(iri, ts, &mut out),
                    Term::Literal { value, lang } => write_literal(value, lang.as_deref(), &mut out),
                }
                i += 1;
            }
        }
        out.push_str(" .\n");
    }
    out.into_bytes()
}
