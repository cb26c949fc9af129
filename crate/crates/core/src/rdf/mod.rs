//! RDF view of annotated documents, with N-Triples and Turtle writers.

mod serialize;

use std::collections::BTreeSet;
use std::fmt;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::{Annotation, VariableBinding};
use crate::document::MathDocument;
use crate::formula::to_mathml;
use crate::ontology::{is_valid_iri, Ontology};

pub use serialize::{serialize_ntriples, serialize_turtle};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const DCTERMS: &str = "http://purl.org/dc/terms/";
pub const BIBO: &str = "http://purl.org/ontology/bibo/";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const MOCASSIN: &str = "http://cll.niimm.ksu.ru/ontologies/mocassin#";
pub const OMP_NS: &str = "http://ontomathpro.org/ontology/";
pub const VOCAB: &str = "https://w3id.org/mathkb/vocab#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Prefix table used by the Turtle writer.
pub const NAMESPACES: &[(&str, &str)] = &[
    ("rdf", RDF),
    ("dcterms", DCTERMS),
    ("bibo", BIBO),
    ("owl", OWL),
    ("moc", MOCASSIN),
    ("omp", OMP_NS),
    ("mkb", VOCAB),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("base IRI '{0}' is not absolute")]
    InvalidBase(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RdfFormat {
    NTriples,
    Turtle,
}

impl RdfFormat {
    /// Accepts `nt` / `ntriples` and `ttl` / `turtle`.
    pub fn parse(name: &str) -> Option<RdfFormat> {
        match name.to_ascii_lowercase().as_str() {
            "nt" | "ntriples" | "n-triples" => Some(RdfFormat::NTriples),
            "ttl" | "turtle" => Some(RdfFormat::Turtle),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            RdfFormat::NTriples => "nt",
            RdfFormat::Turtle => "ttl",
        }
    }

    pub fn content_type(self) -> &'static str {
        match self {
            RdfFormat::NTriples => "text/plain; charset=utf-8",
            RdfFormat::Turtle => "text/turtle; charset=utf-8",
        }
    }

    pub fn serialize(self, ts: &TripleSet) -> Vec<u8> {
        match self {
            RdfFormat::NTriples => serialize_ntriples(ts),
            RdfFormat::Turtle => serialize_turtle(ts),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Iri(String),
    Literal { value: String, lang: Option<String> },
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Term::Literal {
            value: value.into(),
            lang: None,
        }
    }

    pub fn lang_literal(value: impl Into<String>, lang: &str) -> Self {
        Term::Literal {
            value: value.into(),
            lang: Some(lang.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }

    fn sort_key(&self) -> (&str, &str, String) {
        (
            &self.subject,
            &self.predicate,
            serialize::term_ntriples(&self.object),
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize::triple_line(self))
    }
}

/// Deduplicated triples in (subject, predicate, object) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    triples: Vec<Triple>,
    namespaces: Vec<(String, String)>,
}

impl Default for TripleSet {
    fn default() -> Self {
        TripleSet::new(Vec::new())
    }
}

impl TripleSet {
    pub fn new(triples: Vec<Triple>) -> Self {
        let mut triples = triples;
        triples.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        triples.dedup();
        TripleSet {
            triples,
            namespaces: NAMESPACES
                .iter()
                .map(|(p, i)| (p.to_string(), i.to_string()))
                .collect(),
        }
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn namespaces(&self) -> &[(String, String)] {
        &self.namespaces
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }
}

/// Something that gets an IRI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity<'a> {
    Document(&'a str),
    /// Document id and segment number.
    Segment(&'a str, usize),
    /// Document id and formula number.
    Formula(&'a str, usize),
    /// Document id, formula number and 1-based binding number.
    Binding(&'a str, usize, usize),
    Concept(&'a str),
}

/// RFC 3986 unreserved characters stay; everything else is percent-encoded.
const PATH_SEGMENT: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

fn encode(part: &str) -> String {
    utf8_percent_encode(part, PATH_SEGMENT).to_string()
}

pub fn mint_iri(entity: Entity<'_>, base: &str) -> Result<String, RdfError> {
    let has_authority = base
        .split_once("://")
        .is_some_and(|(scheme, rest)| !scheme.is_empty() && !rest.is_empty());
    if !is_valid_iri(base) || !has_authority {
        return Err(RdfError::InvalidBase(base.to_string()));
    }
    let base = base.trim_end_matches('/');
    Ok(match entity {
        Entity::Document(doc) => format!("{base}/doc/{}", encode(doc)),
        Entity::Segment(doc, n) => format!("{base}/doc/{}#s{n}", encode(doc)),
        Entity::Formula(doc, n) => format!("{base}/doc/{}#f{n}", encode(doc)),
        Entity::Binding(doc, n, k) => format!("{base}/doc/{}#f{n}-b{k}", encode(doc)),
        Entity::Concept(id) => format!("{base}/concept/{}", encode(id)),
    })
}

/// IRI of a `<doc>#s<n>` or `<doc>#f<n>` identifier.
fn local_iri(base: &str, doc_id: &str, local_id: &str) -> Result<String, RdfError> {
    let local = local_id.rsplit_once('#').map(|(_, l)| l).unwrap_or(local_id);
    let n: usize = local[1..].parse().unwrap_or(0);
    if local.starts_with('f') {
        mint_iri(Entity::Formula(doc_id, n), base)
    } else {
        mint_iri(Entity::Segment(doc_id, n), base)
    }
}

fn vocab(term: &str) -> String {
    format!("{VOCAB}{term}")
}

/// Triples of one document following the fixed emission table: document
/// header, segment types and containment, typed segment relations, two
/// triples per formula, one `mentionsConcept` per (segment, concept), three
/// per binding, and `owl:sameAs` for the external links of every concept
/// the annotations or bindings reference.
pub fn document_to_triples(
    doc: &MathDocument,
    annotations: &[Annotation],
    bindings: &[VariableBinding],
    o: &Ontology,
    base: &str,
) -> Result<TripleSet, RdfError> {
    let mut out = Vec::new();
    let d = mint_iri(Entity::Document(&doc.id), base)?;
    let lang = doc.metadata.language.code();
    out.push(Triple::new(
        &d,
        RDF_TYPE,
        Term::iri(format!("{BIBO}AcademicArticle")),
    ));
    out.push(Triple::new(
        &d,
        format!("{DCTERMS}title"),
        Term::lang_literal(&doc.metadata.title, lang),
    ));
    for author in &doc.metadata.authors {
        out.push(Triple::new(
            &d,
            format!("{DCTERMS}creator"),
            Term::literal(author),
        ));
    }
    out.push(Triple::new(&d, format!("{DCTERMS}language"), Term::literal(lang)));
    if let Some(abstract_text) = &doc.metadata.abstract_text {
        out.push(Triple::new(
            &d,
            format!("{DCTERMS}abstract"),
            Term::lang_literal(abstract_text, lang),
        ));
    }

    for segment in &doc.segments {
        let s = local_iri(base, &doc.id, &segment.id)?;
        out.push(Triple::new(
            &s,
            RDF_TYPE,
            Term::iri(format!("{MOCASSIN}{}", segment.segment_type.name())),
        ));
        for formula in &segment.formulas {
            let f = local_iri(base, &doc.id, &formula.id)?;
            out.push(Triple::new(&f, RDF_TYPE, Term::iri(vocab("Formula"))));
            match &formula.ast {
                Some(ast) => out.push(Triple::new(&f, vocab("mathml"), Term::literal(to_mathml(ast)))),
                None => out.push(Triple::new(&f, vocab("tex"), Term::literal(&formula.tex))),
            }
        }
    }
    for relation in &doc.relations {
        let predicate = format!("{MOCASSIN}{}", relation.kind.name());
        let src = local_iri(base, &doc.id, &relation.src)?;
        let dst = local_iri(base, &doc.id, &relation.dst)?;
        out.push(Triple::new(src, predicate, Term::iri(dst)));
    }

    let mut referenced = BTreeSet::new();
    for a in annotations {
        let s = local_iri(base, &doc.id, &a.segment_id)?;
        let c = mint_iri(Entity::Concept(&a.concept_id), base)?;
        out.push(Triple::new(s, vocab("mentionsConcept"), Term::iri(c)));
        referenced.insert(a.concept_id.as_str());
    }

    let mut sorted: Vec<&VariableBinding> = bindings.iter().collect();
    sorted.sort_by(|a, b| {
        (&a.formula_id, &a.symbol, &a.concept_id).cmp(&(&b.formula_id, &b.symbol, &b.concept_id))
    });
    let mut previous: Option<&str> = None;
    let mut k = 0;
    for binding in sorted {
        if previous != Some(binding.formula_id.as_str()) {
            k = 0;
            previous = Some(&binding.formula_id);
        }
        k += 1;
        let n = binding
            .formula_id
            .rsplit_once("#f")
            .and_then(|(_, n)| n.parse().ok())
            .unwrap_or(0);
        let b = mint_iri(Entity::Binding(&doc.id, n, k), base)?;
        let c = mint_iri(Entity::Concept(&binding.concept_id), base)?;
        out.push(Triple::new(&b, RDF_TYPE, Term::iri(vocab("SymbolBinding"))));
        out.push(Triple::new(&b, vocab("symbol"), Term::literal(&binding.symbol)));
        out.push(Triple::new(&b, vocab("boundConcept"), Term::iri(c)));
        referenced.insert(binding.concept_id.as_str());
    }

    for id in referenced {
        let Some(concept) = o.concept(id) else {
            continue;
        };
        let c = mint_iri(Entity::Concept(id), base)?;
        for link in concept.external_links.iter().filter(|l| is_valid_iri(l)) {
            out.push(Triple::new(&c, format!("{OWL}sameAs"), Term::iri(link)));
        }
    }
    Ok(TripleSet::new(out))
}
