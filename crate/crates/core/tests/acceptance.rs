//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (`harness = false`) so the report is printed in order.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use mathkb::annotator::BindingPatterns;
use mathkb::document::{SegmentRelationKind, SegmentType};
use mathkb::formula::{
    normalize_node, parse_tex_formula, subterms_of, to_tex, AstNode, FormulaPattern, NodePath,
};
use mathkb::interface::http::{router, AppState};
use mathkb::interface::{document_rdf, ingest_dir, ServiceConfig, DEFAULT_BASE_IRI};
use mathkb::ontology::{
    parse_ontology_document, validate, Ontology, OntologyDocument, RelationEdge, RelationKind,
    ValidationIssue,
};
use mathkb::rdf::RdfFormat;
use mathkb::recommender::{recommend, similarity, ConceptVector, Profile};
use mathkb::search::{
    aggregate, search_formula_semantic, search_formula_syntactic, search_segments, AggregateCriteria,
    Highlight, Hit, Index, SemanticQuery,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn parse(tex: &str) -> Result<AstNode, String> {
    parse_tex_formula(tex)
        .map(|a| a.root)
        .map_err(|e| format!("generated formula '{tex}' does not parse: {e}"))
}

fn hit_ids(hits: &[Hit]) -> BTreeSet<String> {
    hits.iter()
        .map(|h| h.formula_id.clone().unwrap_or_else(|| h.segment_id.clone()))
        .collect()
}

fn hit_locations(hits: &[Hit]) -> BTreeMap<String, BTreeSet<NodePath>> {
    hits.iter()
        .map(|h| {
            let paths = h
                .highlights
                .iter()
                .filter_map(|hl| match hl {
                    Highlight::Node { path } => Some(path.clone()),
                    _ => None,
                })
                .collect();
            (h.formula_id.clone().unwrap_or_default(), paths)
        })
        .collect()
}

/// Renames every corpus formula through `map` and rebuilds the articles.
fn renamed_corpus(asts: &[AstNode], map: &BTreeMap<String, String>) -> Result<Vec<String>, String> {
    asts.iter()
        .map(|a| {
            let renamed = rename(a, map);
            let tex = to_tex(&renamed);
            ensure(parse(&tex)? == renamed, || {
                format!("'{tex}' does not reparse to its tree")
            })?;
            Ok(tex)
        })
        .collect()
}

fn random_pattern(rng: &mut ChaCha8Rng, asts: &[AstNode]) -> FormulaPattern {
    if rng.gen_bool(0.15) {
        let fresh = parse_tex_formula(&random_formula_tex(rng))
            .expect("generated")
            .root;
        return FormulaPattern::from_node(wildcardize(rng, &fresh, 0.2));
    }
    let source = asts.choose(rng).expect("corpus");
    let subterms = subterms_of(source);
    let (_, node) = subterms.choose(rng).expect("subterm");
    let node = wildcardize(rng, node, 0.2);
    let map = random_renaming(rng, &variables(&node));
    FormulaPattern::from_node(rename(&node, &map))
}

fn alpha_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1FA);
    let formulas: Vec<AstNode> = (0..200)
        .map(|_| parse(&random_formula_tex(&mut rng)))
        .collect::<Result<_, _>>()?;
    let skeleton = |n: &AstNode| normalize_node(n).skeleton;

    let (mut comparisons, mut mismatches, mut positives) = (0, 0, 0);
    for (i, f) in formulas.iter().enumerate() {
        for j in 0..50 {
            let g = rename(f, &random_renaming(&mut rng, &variables(f)));
            let other = &formulas[(i + j + 1) % formulas.len()];
            let h = rename(other, &random_renaming(&mut rng, &variables(other)));
            for (x, y) in [(f, &g), (f, &h)] {
                let brute = alpha_equivalent_brute(x, y);
                comparisons += 1;
                positives += usize::from(brute);
                if (skeleton(x) == skeleton(y)) != brute {
                    mismatches += 1;
                }
            }
        }
    }
    ensure(mismatches == 0, || {
        format!("{mismatches} skeleton/brute-force mismatches")
    })?;

    // corpus-wide renaming leaves syntactic hit ids unchanged
    let corpus: Vec<AstNode> = formulas[..40].to_vec();
    let texts: Vec<String> = corpus.iter().map(to_tex).collect();
    let base = index_sources(Arc::new(Ontology::empty()), &formula_articles(&texts, 4));
    let all_vars: BTreeSet<String> = corpus.iter().flat_map(variables).collect();
    let all_vars: Vec<String> = all_vars.into_iter().collect();
    let mut patterns = 0;
    for _ in 0..5 {
        let map = random_renaming(&mut rng, &all_vars);
        let renamed = index_sources(
            Arc::new(Ontology::empty()),
            &formula_articles(&renamed_corpus(&corpus, &map)?, 4),
        );
        for _ in 0..20 {
            let p = random_pattern(&mut rng, &corpus);
            let before = hit_ids(&search_formula_syntactic(&base, &p));
            let after = hit_ids(&search_formula_syntactic(&renamed, &p));
            ensure(before == after, || {
                format!("pattern '{}' hits differ after renaming", p.source)
            })?;
            patterns += 1;
        }
    }
    Ok(format!(
        "{comparisons} comparisons ({positives} equivalent), 0 mismatches; {patterns} patterns stable under 5 corpus renamings"
    ))
}

fn search_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EA5);
    let (mut total, mut with_hits) = (0, 0);
    for _ in 0..5 {
        let n = rng.gen_range(20..=50);
        let texts: Vec<String> = (0..n).map(|_| random_formula_tex(&mut rng)).collect();
        let asts: Vec<AstNode> = texts.iter().map(|t| parse(t)).collect::<Result<_, _>>()?;
        let ix = index_sources(Arc::new(Ontology::empty()), &formula_articles(&texts, 5));
        for _ in 0..20 {
            let p = random_pattern(&mut rng, &asts);
            let expected = naive_scan(&ix, &p);
            let actual = hit_locations(&search_formula_syntactic(&ix, &p));
            ensure(actual == expected, || {
                format!("pattern '{}': index {actual:?} vs scan {expected:?}", p.source)
            })?;
            total += 1;
            with_hits += usize::from(!expected.is_empty());
        }
    }
    Ok(format!(
        "{total}/{total} patterns equal the naive scan ({with_hits} with hits)"
    ))
}

fn semantic_ids(ix: &Index, q: &SemanticQuery) -> Result<BTreeSet<String>, String> {
    search_formula_semantic(ix, q)
        .map(|hits| hit_ids(&hits))
        .map_err(|e| e.to_string())
}

fn hierarchy_expansion() -> Outcome {
    let ix = fixture_index();
    let o = ix.ontology();
    let children = o.descendants("Polygon").map_err(|e| e.to_string())?;
    let family = ["Polygon", "Triangle", "Parallelogram", "Trapezium", "Hexagon"];
    ensure(
        children
            .iter()
            .map(String::as_str)
            .eq(family.iter().copied().collect::<BTreeSet<_>>()),
        || format!("polygon subtree is {children:?}"),
    )?;
    let expanded = semantic_ids(ix, &SemanticQuery::new(["Polygon"]))?;
    let mut union = BTreeSet::new();
    for c in family {
        union.extend(semantic_ids(ix, &SemanticQuery::new([c]).expand(false))?);
    }
    ensure(expanded == union, || {
        format!("expanded {expanded:?} vs union {union:?}")
    })?;
    ensure(!expanded.is_empty(), || "no polygon hits".into())?;

    let mut queries: Vec<Vec<String>> = o.concept_ids().map(|c| vec![c.to_string()]).collect();
    queries.push(vec!["AreaOfCircle".into(), "Circumference".into()]);
    queries.push(vec!["Polygon".into(), "Angle".into()]);
    queries.push(vec!["FiniteGroup".into(), "PrimeNumber".into()]);
    let mut checked = 0;
    for q in &queries {
        for expand in [true, false] {
            let all = semantic_ids(ix, &SemanticQuery::new(q.clone()).expand(expand))?;
            let scoped = semantic_ids(
                ix,
                &SemanticQuery::new(q.clone())
                    .expand(expand)
                    .scope(SegmentType::Theorem),
            )?;
            ensure(scoped.is_subset(&all), || {
                format!("scope=Theorem not a subset for {q:?}")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{{Polygon}} expanded = union of 5 unexpanded ({} hits); scope subset on {checked} queries",
        expanded.len()
    ))
}

fn fermat_query() -> Outcome {
    let ix = fixture_index();
    let golden: Vec<String> = serde_json::from_str(
        &std::fs::read_to_string(fixtures().join("golden/fermat_theorems.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    for target in ["FermatTheorem", "Fermat's theorem", "теорема Ферма"] {
        let hits = search_segments(ix, SegmentType::Theorem, SegmentRelationKind::Proves, target)
            .map_err(|e| e.to_string())?;
        let ids: Vec<String> = hits.iter().map(|h| h.segment_id.clone()).collect();
        ensure(ids == golden, || {
            format!("target '{target}': {ids:?} vs golden {golden:?}")
        })?;
    }
    Ok(format!(
        "{} theorems match the golden list by id and by en/ru label",
        golden.len()
    ))
}

fn parse_rdf(bytes: &[u8], format: RdfFormat) -> Result<BTreeSet<String>, String> {
    let triples: Result<BTreeSet<String>, _> = match format {
        RdfFormat::NTriples => oxttl::NTriplesParser::new()
            .for_slice(bytes)
            .map(|t| t.map(|t| t.to_string()))
            .collect(),
        RdfFormat::Turtle => oxttl::TurtleParser::new()
            .for_slice(bytes)
            .map(|t| t.map(|t| t.to_string()))
            .collect(),
    };
    triples.map_err(|e| e.to_string())
}

/// Both serializations parse and carry the same triple set.
fn checked_rdf(ix: &Index, id: &str) -> Result<BTreeSet<String>, String> {
    let nt = document_rdf(ix, id, DEFAULT_BASE_IRI, RdfFormat::NTriples).map_err(|e| e.to_string())?;
    let ttl = document_rdf(ix, id, DEFAULT_BASE_IRI, RdfFormat::Turtle).map_err(|e| e.to_string())?;
    let a = parse_rdf(&nt, RdfFormat::NTriples).map_err(|e| format!("{id}.nt: {e}"))?;
    let b = parse_rdf(&ttl, RdfFormat::Turtle).map_err(|e| format!("{id}.ttl: {e}"))?;
    ensure(a == b, || format!("{id}: N-Triples and Turtle differ"))?;
    let lines = nt.iter().filter(|&&c| c == b'\n').count();
    ensure(lines == a.len(), || {
        format!("{id}: {lines} lines but {} distinct triples", a.len())
    })?;
    Ok(a)
}

/// Expected triple count from document shape alone.
fn emission_count(ix: &Index, id: &str) -> usize {
    let entry = ix.document(id).expect("doc");
    let (doc, ann) = (&entry.doc, &entry.annotations);
    let m = &doc.metadata;
    let authors: BTreeSet<&String> = m.authors.iter().collect();
    let header = 3 + authors.len() + usize::from(m.abstract_text.is_some());
    let relations: BTreeSet<_> = doc.relations.iter().map(|r| (&r.src, r.kind, &r.dst)).collect();
    let formulas: usize = doc.segments.iter().map(|s| s.formulas.len()).sum();
    let mentions: BTreeSet<_> = ann
        .annotations
        .iter()
        .map(|a| (&a.segment_id, &a.concept_id))
        .collect();
    let referenced: BTreeSet<&String> = ann
        .annotations
        .iter()
        .map(|a| &a.concept_id)
        .chain(ann.bindings.iter().map(|b| &b.concept_id))
        .collect();
    let links: usize = referenced
        .iter()
        .filter_map(|c| ix.ontology().concept(c))
        .map(|c| c.external_links.len())
        .sum();
    header
        + doc.segments.len()
        + relations.len()
        + 2 * formulas
        + mentions.len()
        + 3 * ann.bindings.len()
        + links
}

const PHRASES: &[&str] = &[
    "the triangle",
    "a polygon",
    "the curvature",
    "the area of a circle",
    "a finite group",
    "the order",
    "a prime number",
    "the derivative",
    "Fermat's theorem",
    "a random variable",
    "the matrix",
    "кривизна",
    "треугольник",
];

fn random_article(rng: &mut ChaCha8Rng, i: usize) -> String {
    let mut s = String::from("\\documentclass{article}\n");
    s.push_str(&format!(
        "\\title{{Random note {i} on {}}}\n",
        PHRASES.choose(rng).unwrap()
    ));
    let authors = ["Ann Lee", "Bo Chen", "Cy Diaz", "Dee Roy"];
    let n_authors = rng.gen_range(0..=3);
    if n_authors > 0 {
        let chosen: Vec<&str> = authors.choose_multiple(rng, n_authors).copied().collect();
        s.push_str(&format!("\\author{{{}}}\n", chosen.join(" \\and ")));
    }
    s.push_str("\\begin{document}\n");
    if rng.gen_bool(0.5) {
        s.push_str(&format!(
            "\\begin{{abstract}}\nOn {}.\n\\end{{abstract}}\n",
            PHRASES.choose(rng).unwrap()
        ));
    }
    let envs = [
        "theorem",
        "lemma",
        "proof",
        "definition",
        "example",
        "remark",
        "corollary",
    ];
    let mut labels: Vec<String> = Vec::new();
    for k in 0..rng.gen_range(0..8) {
        if rng.gen_bool(0.2) {
            s.push_str(&format!("\\section{{Part {k}}}\n"));
        }
        let env = envs.choose(rng).unwrap();
        s.push_str(&format!("\\begin{{{env}}}"));
        if *env != "proof" && rng.gen_bool(0.6) {
            let label = format!("l{k}");
            s.push_str(&format!("\\label{{{label}}}"));
            labels.push(label);
        }
        s.push('\n');
        for _ in 0..rng.gen_range(1..4) {
            let phrase = PHRASES.choose(rng).unwrap();
            match rng.gen_range(0..4) {
                0 => s.push_str(&format!("Consider {phrase}. ")),
                1 => s.push_str(&format!(
                    "We have ${}$, where $x$ is {phrase}. ",
                    random_formula_tex(rng)
                )),
                2 => s.push_str(&format!("Then ${}$ holds. ", random_formula_tex(rng))),
                _ => {
                    if let Some(l) = labels.choose(rng) {
                        s.push_str(&format!("Hence, by \\ref{{{l}}}, {phrase} follows. "));
                    }
                }
            }
        }
        s.push_str(&format!("\n\\end{{{env}}}\n"));
    }
    s.push_str("\\end{document}\n");
    s
}

fn rdf_export() -> Outcome {
    let ix = fixture_index();
    let mut files = 0;
    for entry in ix.documents() {
        checked_rdf(ix, &entry.doc.id)?;
        files += 2;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x0BDF);
    let sources: Vec<(String, String)> = (0..100)
        .map(|i| (format!("r{i:03}"), random_article(&mut rng, i)))
        .collect();
    let random = index_sources(ontology(), &sources);
    let mut triples = 0;
    for (id, _) in &sources {
        let parsed = checked_rdf(&random, id)?;
        let expected = emission_count(&random, id);
        ensure(parsed.len() == expected, || {
            format!("{id}: {} triples, oracle {expected}", parsed.len())
        })?;
        triples += parsed.len();
        files += 2;
    }

    for format in [RdfFormat::NTriples, RdfFormat::Turtle] {
        let actual = document_rdf(ix, "circle", DEFAULT_BASE_IRI, format).map_err(|e| e.to_string())?;
        let path = fixtures().join(format!("golden/circle.{}", format.extension()));
        let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(actual == golden, || {
            format!("{} differs from the export", path.display())
        })?;
    }
    Ok(format!(
        "{files} files parse under oxttl; 100 random docs ({triples} triples) match the count oracle; golden nt/ttl byte-equal"
    ))
}

fn ontology_validation() -> Outcome {
    let file = std::fs::File::open(ontology_path()).map_err(|e| e.to_string())?;
    let clean = parse_ontology_document(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    let report = validate(&Ontology::from_document(clean.clone()));
    ensure(report.errors.is_empty() && report.warnings.is_empty(), || {
        format!("clean fixture: {report}")
    })?;

    let edge = |src: &str, kind, dst: &str| RelationEdge {
        src: src.into(),
        kind,
        dst: dst.into(),
    };
    type Inject = Box<dyn Fn(&mut OntologyDocument)>;
    type Expect = fn(&ValidationIssue) -> bool;
    let cases: Vec<(&str, Inject, Expect)> = vec![
        (
            "IsA cycle",
            Box::new(move |d| {
                d.relations
                    .push(edge("GeometricFigure", RelationKind::IsA, "Triangle"))
            }),
            |i| matches!(i, ValidationIssue::IsaCycle { .. }),
        ),
        (
            "dangling edge",
            Box::new(move |d| {
                d.relations
                    .push(edge("Triangle", RelationKind::SeeAlso, "NoSuchConcept"))
            }),
            |i| matches!(i, ValidationIssue::DanglingEndpoint { .. }),
        ),
        (
            "object isA area",
            Box::new(move |d| d.relations.push(edge("Triangle", RelationKind::IsA, "Geometry"))),
            |i| matches!(i, ValidationIssue::KindDomain { .. }),
        ),
        (
            "area belongsTo object",
            Box::new(move |d| {
                d.relations
                    .push(edge("Geometry", RelationKind::BelongsTo, "Triangle"))
            }),
            |i| matches!(i, ValidationIssue::KindDomain { .. }),
        ),
        (
            "duplicate id",
            Box::new(|d| {
                let copy = d
                    .concepts
                    .iter()
                    .find(|c| c.id == "Triangle")
                    .cloned()
                    .expect("Triangle");
                d.concepts.push(copy);
            }),
            |i| matches!(i, ValidationIssue::DuplicateId { .. }),
        ),
        (
            "missing label",
            Box::new(|d| {
                let c = d
                    .concepts
                    .iter_mut()
                    .find(|c| c.id == "Hexagon")
                    .expect("Hexagon");
                c.labels.clear();
            }),
            |i| matches!(i, ValidationIssue::NoLabels { .. }),
        ),
    ];
    let count = cases.len();
    for (name, inject, expect) in cases {
        let mut doc = clean.clone();
        inject(&mut doc);
        let report = validate(&Ontology::from_document(doc));
        ensure(report.errors.iter().any(expect), || {
            format!("{name} not flagged: {report}")
        })?;
    }
    Ok(format!(
        "{count}/{count} injected violations flagged; clean fixture 0 errors, 0 warnings"
    ))
}

fn random_vector(rng: &mut ChaCha8Rng) -> ConceptVector {
    let keys = ["A", "B", "C", "D", "E", "F", "G", "H"];
    let n = rng.gen_range(0..=keys.len());
    keys.choose_multiple(rng, n)
        .map(|k| (k.to_string(), rng.gen_range(0.0..10.0)))
        .collect()
}

fn ranking(ix: &Index, id: &str, p: &Profile) -> Result<Vec<String>, String> {
    recommend(ix, id, p, ix.len())
        .map(|r| r.into_iter().map(|r| r.doc_id).collect())
        .map_err(|e| e.to_string())
}

fn breadth_corpus() -> Index {
    let note = |body: &str| article("Note", body);
    index_sources(
        ontology(),
        &[
            ("query".into(), note("Consider the triangle.")),
            (
                "narrow".into(),
                note("A triangle, a triangle, a triangle and a parallelogram."),
            ),
            (
                "wide".into(),
                note("A triangle, a triangle, a triangle and a prime number."),
            ),
        ],
    )
}

fn recommender_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2EC0);
    for _ in 0..1000 {
        let (a, b) = (random_vector(&mut rng), random_vector(&mut rng));
        let s = similarity(&a, &b);
        ensure((0.0..=1.0).contains(&s), || {
            format!("similarity {s} out of range")
        })?;
        ensure((s - similarity(&b, &a)).abs() < 1e-12, || {
            "similarity not symmetric".into()
        })?;
        let c = rng.gen_range(0.01..100.0);
        let scaled: ConceptVector = a.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        ensure((s - similarity(&scaled, &b)).abs() < 1e-9, || {
            format!("scaling by {c} changed similarity")
        })?;
    }

    let ix = fixture_index();
    let ids: Vec<String> = ix.documents().iter().map(|d| d.doc.id.clone()).collect();
    for _ in 0..100 {
        let id = ids.choose(&mut rng).unwrap();
        let p = Profile::new(
            "random",
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.1..5.0),
            rng.gen_range(0.0..0.99),
            rng.gen_range(0.0..2.0),
        );
        let k = rng.gen_range(1..=ids.len());
        let recs = recommend(ix, id, &p, k).map_err(|e| e.to_string())?;
        ensure(recs.iter().all(|r| &r.doc_id != id), || {
            format!("{id} recommended to itself")
        })?;
    }

    for id in &ids {
        for base in [Profile::referee(), Profile::novice()] {
            let expected = ranking(ix, id, &base)?;
            for c in [0.5, 2.0, 3.0, 10.0] {
                let mut scaled = base.clone();
                scaled.kind_weights.values_mut().for_each(|w| *w *= c);
                ensure(ranking(ix, id, &scaled)? == expected, || {
                    format!("{id}: scaling {} weights by {c} changed the ranking", base.name)
                })?;
            }
        }
    }

    let constructed = breadth_corpus();
    let referee = ranking(&constructed, "query", &Profile::referee())?;
    let novice = ranking(&constructed, "query", &Profile::novice())?;
    ensure(referee == ["narrow", "wide"], || {
        format!("referee order {referee:?}")
    })?;
    ensure(novice == ["wide", "narrow"], || {
        format!("novice order {novice:?}")
    })?;
    Ok("1000 pairs symmetric/in range/scale-invariant; 100/100 self-excluded; rankings stable under weight scaling; referee [narrow, wide], novice [wide, narrow]".into())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn performance() -> Outcome {
    let (result, ingest) = timed(|| ingest_dir(&corpus_dir(), ontology(), &BindingPatterns::default()));
    let (ix, report) = result.map_err(|e| e.to_string())?;
    ensure(ix.len() >= 20 && report.failures.is_empty(), || {
        format!("{report}")
    })?;
    ensure(ingest < Duration::from_secs(5), || {
        format!("ingest took {ingest:?}")
    })?;

    let mut slowest = Duration::ZERO;
    let mut queries = 0;
    let mut run = |f: &dyn Fn() -> bool| -> Result<(), String> {
        let (ok, t) = timed(f);
        ensure(ok, || "query failed".into())?;
        slowest = slowest.max(t);
        queries += 1;
        Ok(())
    };
    for p in ["?a^2 + ?b^2 = ?c^2", "\\frac{?a}{?b}", "S = ?_", "?x", "k_1 k_2"] {
        let pattern = FormulaPattern::parse(p).map_err(|e| e.to_string())?;
        run(&|| {
            search_formula_syntactic(&ix, &pattern);
            true
        })?;
    }
    for q in [
        vec!["Polygon"],
        vec!["Curvature"],
        vec!["AreaOfCircle", "Circumference"],
        vec!["Group"],
    ] {
        run(&|| search_formula_semantic(&ix, &SemanticQuery::new(q.clone())).is_ok())?;
    }
    run(&|| {
        search_segments(
            &ix,
            SegmentType::Theorem,
            SegmentRelationKind::Proves,
            "FermatTheorem",
        )
        .is_ok()
    })?;
    run(&|| {
        let criteria = AggregateCriteria {
            segment_type: Some(SegmentType::Theorem),
            area: Some("GroupTheory".into()),
            object: None,
        };
        aggregate(&ix, &criteria).is_ok()
    })?;
    for entry in ix.documents() {
        run(&|| recommend(&ix, &entry.doc.id, &Profile::novice(), 5).is_ok())?;
    }
    ensure(slowest < Duration::from_millis(50), || {
        format!("slowest query {slowest:?}")
    })?;

    let (bodies, reloads) = concurrent_http()?;
    Ok(format!(
        "ingest {ingest:.2?}; slowest of {queries} queries {slowest:.2?}; {bodies} concurrent HTTP bodies identical across {reloads} reload"
    ))
}

fn concurrent_http() -> Result<(usize, usize), String> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let config = ServiceConfig::new(corpus_dir(), ontology_path(), 1);
        let (state, _) = AppState::from_config(config).map_err(|e| e.to_string())?;
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
            .await
            .map_err(|e| e.to_string())?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        let server = tokio::spawn(async move { axum::serve(listener, router(Arc::new(state))).await });

        let client = reqwest::Client::new();
        let url = format!("http://{addr}/search/formula?mode=semantic&concepts=Polygon");
        let mut tasks = tokio::task::JoinSet::new();
        for i in 0..1000 {
            let (client, url) = (client.clone(), url.clone());
            if i == 500 {
                let reload = format!("http://{addr}/admin/reload");
                let c = client.clone();
                tasks.spawn(async move {
                    let r = c.post(reload).send().await.map_err(|e| e.to_string())?;
                    if r.status().is_success() {
                        Ok(None)
                    } else {
                        Err(format!("reload returned {}", r.status()))
                    }
                });
            }
            tasks.spawn(async move {
                let r = client.get(url).send().await.map_err(|e| e.to_string())?;
                if !r.status().is_success() {
                    return Err(format!("status {}", r.status()));
                }
                r.bytes()
                    .await
                    .map(|b| Some(b.to_vec()))
                    .map_err(|e| e.to_string())
            });
        }
        let mut bodies: BTreeSet<Vec<u8>> = BTreeSet::new();
        let (mut count, mut errors) = (0, Vec::new());
        while let Some(joined) = tasks.join_next().await {
            match joined.map_err(|e| e.to_string()).and_then(|r| r) {
                Ok(Some(body)) => {
                    bodies.insert(body);
                    count += 1;
                }
                Ok(None) => {}
                Err(e) => errors.push(e),
            }
        }
        server.abort();
        ensure(errors.is_empty(), || {
            format!("{} errors, first: {}", errors.len(), errors[0])
        })?;
        ensure(bodies.len() == 1, || format!("{} distinct bodies", bodies.len()))?;
        Ok((count, 1))
    })
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("alpha-invariance", alpha_invariance),
        ("search oracle", search_oracle),
        ("hierarchy expansion", hierarchy_expansion),
        ("fermat-style query", fermat_query),
        ("rdf export", rdf_export),
        ("ontology validation", ontology_validation),
        ("recommender", recommender_properties),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
