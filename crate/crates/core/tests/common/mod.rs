//! Shared fixtures and generators for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use mathkb::annotator::BindingPatterns;
use mathkb::formula::{is_variable_name, match_pattern, AstNode, FormulaPattern, NodePath};
use mathkb::interface::{ingest_dir, ingest_sources};
use mathkb::ontology::{load_ontology_file, Ontology};
use mathkb::search::Index;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus_dir() -> PathBuf {
    fixtures().join("corpus")
}

pub fn ontology_path() -> PathBuf {
    fixtures().join("ontology.json")
}

pub fn ontology() -> Arc<Ontology> {
    static O: OnceLock<Arc<Ontology>> = OnceLock::new();
    O.get_or_init(|| Arc::new(load_ontology_file(ontology_path()).expect("fixture ontology")))
        .clone()
}

/// The fixture corpus, ingested once per test binary.
pub fn fixture_index() -> &'static Index {
    static IX: OnceLock<Index> = OnceLock::new();
    IX.get_or_init(|| {
        let (ix, report) =
            ingest_dir(&corpus_dir(), ontology(), &BindingPatterns::default()).expect("fixture corpus");
        assert!(report.failures.is_empty(), "{report}");
        ix
    })
}

/// Indexes LaTeX sources given as `(id, text)` against `o`.
pub fn index_sources(o: Arc<Ontology>, sources: &[(String, String)]) -> Index {
    let sources = sources
        .iter()
        .map(|(id, text)| (id.clone(), text.as_bytes().to_vec()))
        .collect();
    let (ix, report) = ingest_sources(sources, o, &BindingPatterns::default()).expect("index");
    assert!(report.failures.is_empty(), "{report}");
    ix
}

/// Wraps body text into a minimal article.
pub fn article(title: &str, body: &str) -> String {
    format!(
        "\\documentclass{{article}}\n\\title{{{title}}}\n\\begin{{document}}\n{body}\n\\end{{document}}\n"
    )
}

const VARIABLES: &[&str] = &["x", "y", "z", "w", "\\alpha"];
const INFIX: &[&str] = &["+", "-", "\\cdot"];
const RELATIONS: &[&str] = &["=", "<", "\\leq"];

fn operand(rng: &mut impl Rng, depth: u32) -> String {
    let e = expr(rng, depth);
    if e.contains(' ') {
        format!("({e})")
    } else {
        e
    }
}

fn leaf(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.75) {
        VARIABLES.choose(rng).unwrap().to_string()
    } else {
        rng.gen_range(1..4).to_string()
    }
}

fn expr(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0..=2 => format!(
            "{} {} {}",
            operand(rng, d),
            INFIX.choose(rng).unwrap(),
            operand(rng, d)
        ),
        3 => format!("{} {}", operand(rng, d), operand(rng, d)),
        4 => format!("\\frac{{{}}}{{{}}}", expr(rng, d), expr(rng, d)),
        5 => format!("{{{}}}^{{{}}}", operand(rng, d), leaf(rng)),
        6 => format!("{}_{{{}}}", VARIABLES.choose(rng).unwrap(), rng.gen_range(0..3)),
        _ => format!("\\sin({})", expr(rng, d)),
    }
}

/// Random TeX formula from a small grammar, so that distinct draws often
/// share a skeleton.
pub fn random_formula_tex(rng: &mut impl Rng) -> String {
    let depth = rng.gen_range(1..4);
    if rng.gen_bool(0.3) {
        format!(
            "{} {} {}",
            expr(rng, depth),
            RELATIONS.choose(rng).unwrap(),
            expr(rng, depth)
        )
    } else {
        expr(rng, depth)
    }
}

/// Distinct variable names in pre-order of first occurrence.
pub fn variables(node: &AstNode) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    node.walk(&mut |n| {
        if let AstNode::Identifier { name } = n {
            if is_variable_name(name) && !out.contains(name) {
                out.push(name.clone());
            }
        }
    });
    out
}

pub fn rename(node: &AstNode, map: &BTreeMap<String, String>) -> AstNode {
    let mut out = node.clone();
    rename_in_place(&mut out, map);
    out
}

fn rename_in_place(node: &mut AstNode, map: &BTreeMap<String, String>) {
    if let AstNode::Identifier { name } = node {
        if let Some(to) = map.get(name.as_str()) {
            *name = to.clone();
        }
        return;
    }
    for child in node.children_mut() {
        rename_in_place(child, map);
    }
}

/// Single-letter names a renaming may draw from.
pub fn renaming_pool() -> Vec<String> {
    ('a'..='z')
        .chain('A'..='Z')
        .filter(|c| !matches!(c, 'd' | 'e' | 'i'))
        .map(|c| c.to_string())
        .collect()
}

/// A random injective renaming of `vars` into the pool.
pub fn random_renaming(rng: &mut impl Rng, vars: &[String]) -> BTreeMap<String, String> {
    let pool = renaming_pool();
    let targets: Vec<&String> = pool.choose_multiple(rng, vars.len()).collect();
    vars.iter().cloned().zip(targets.into_iter().cloned()).collect()
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Brute force: is there a bijection of variables turning `a` into `b`?
pub fn alpha_equivalent_brute(a: &AstNode, b: &AstNode) -> bool {
    let va = variables(a);
    let vb = variables(b);
    if va.len() != vb.len() {
        return false;
    }
    // rename a's variables to fresh names first so the target names never collide
    let fresh: BTreeMap<String, String> = va
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), format!("#{i}")))
        .collect();
    let a = rename(a, &fresh);
    let fresh_names: Vec<String> = (0..va.len()).map(|i| format!("#{i}")).collect();
    permutations(&vb).into_iter().any(|targets| {
        let map: BTreeMap<String, String> = fresh_names.iter().cloned().zip(targets).collect();
        rename(&a, &map) == *b
    })
}

/// Formula id → match locations by scanning every subterm of every formula.
pub fn naive_scan(ix: &Index, pattern: &FormulaPattern) -> BTreeMap<String, BTreeSet<NodePath>> {
    let mut out = BTreeMap::new();
    for entry in ix.documents() {
        for segment in &entry.doc.segments {
            for formula in &segment.formulas {
                let Some(ast) = &formula.ast else { continue };
                let found: BTreeSet<NodePath> = match_pattern(pattern, ast)
                    .into_iter()
                    .map(|m| m.location)
                    .collect();
                if !found.is_empty() {
                    out.insert(formula.id.clone(), found);
                }
            }
        }
    }
    out
}

/// Replaces random subtrees by wildcards drawn from a small tag set, so tags
/// repeat and impose equality constraints.
pub fn wildcardize(rng: &mut impl Rng, node: &AstNode, rate: f64) -> AstNode {
    if rng.gen_bool(rate) {
        return AstNode::wildcard(*["a", "b", "_"].choose(rng).unwrap());
    }
    let mut out = node.clone();
    let children: Vec<AstNode> = node
        .children()
        .into_iter()
        .map(|c| wildcardize(rng, c, rate))
        .collect();
    for (slot, child) in out.children_mut().into_iter().zip(children) {
        *slot = child;
    }
    out
}

/// Articles holding the given formulas, a few per document.
pub fn formula_articles(formulas: &[String], per_doc: usize) -> Vec<(String, String)> {
    formulas
        .chunks(per_doc)
        .enumerate()
        .map(|(i, chunk)| {
            let body: Vec<String> = chunk
                .iter()
                .map(|f| format!("\\begin{{remark}}\nWe have ${f}$.\n\\end{{remark}}"))
                .collect();
            (
                format!("d{i:02}"),
                article(&format!("Formulas {i}"), &body.join("\n")),
            )
        })
        .collect()
}
