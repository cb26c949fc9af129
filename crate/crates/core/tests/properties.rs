mod common;

use std::collections::BTreeMap;

use common::*;
use mathkb::document::{SegmentRelationKind, SegmentType};
use mathkb::formula::{normalize_node, parse_tex_formula, subterms_of, to_mathml_marked, to_tex, NodePath};
use mathkb::ontology::Ontology;
use mathkb::recommender::{add_occurrence, similarity, ConceptVector, Profile};
use mathkb::search::{
    aggregate, highlight, search_formula_semantic, search_segments, AggregateCriteria, Index, SemanticQuery,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula_tex() -> impl Strategy<Value = String> {
    any::<u64>().prop_map(|seed| random_formula_tex(&mut ChaCha8Rng::seed_from_u64(seed)))
}

fn highlight_count(xml: &str) -> usize {
    let doc = roxmltree::Document::parse(xml).expect("well-formed MathML");
    doc.descendants()
        .filter(|n| n.attribute("class") == Some("highlight"))
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn tex_round_trips(tex in formula_tex()) {
        let ast = parse_tex_formula(&tex).unwrap().root;
        let printed = to_tex(&ast);
        prop_assert_eq!(parse_tex_formula(&printed).unwrap().root, ast);
    }

    #[test]
    fn normalization_is_idempotent(tex in formula_tex()) {
        let ast = parse_tex_formula(&tex).unwrap().root;
        let once = normalize_node(&ast).skeleton;
        prop_assert_eq!(normalize_node(&once).skeleton, once);
    }

    #[test]
    fn renaming_preserves_skeleton(tex in formula_tex(), seed in any::<u64>()) {
        let ast = parse_tex_formula(&tex).unwrap().root;
        let map = random_renaming(&mut ChaCha8Rng::seed_from_u64(seed), &variables(&ast));
        prop_assert_eq!(normalize_node(&rename(&ast, &map)).digest(), normalize_node(&ast).digest());
    }

    #[test]
    fn marked_mathml_is_well_formed(tex in formula_tex(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..3)) {
        let ast = parse_tex_formula(&tex).unwrap().root;
        let subterms = subterms_of(&ast);
        let mut marked: Vec<NodePath> = picks.iter().map(|i| subterms[i.index(subterms.len())].0.clone()).collect();
        marked.sort();
        marked.dedup();
        let xml = to_mathml_marked(&ast, &marked);
        prop_assert_eq!(highlight_count(&xml), marked.len());
    }

    #[test]
    fn disjoint_support_hierarchy_never_lowers_similarity(
        a in prop::collection::vec(0usize..1000, 1..5),
        b in prop::collection::vec(0usize..1000, 1..5),
        decay in 0.05f64..0.95,
    ) {
        let o = ontology();
        let objects: Vec<&str> = o
            .concepts()
            .iter()
            .filter(|c| c.kind == mathkb::ontology::ConceptKind::Object)
            .map(|c| c.id.as_str())
            .collect();
        let pick = |xs: &[usize]| -> Vec<&str> { xs.iter().map(|i| objects[i % objects.len()]).collect() };
        let (a, b) = (pick(&a), pick(&b));
        prop_assume!(a.iter().all(|c| !b.contains(c)));
        let vector = |cs: &[&str], p: &Profile| {
            let mut v = ConceptVector::new();
            for c in cs {
                add_occurrence(&mut v, c, &o, p);
            }
            v
        };
        let flat = Profile::new("flat", 1.0, 1.0, 0.0, 0.0);
        let deep = Profile::new("deep", 1.0, 1.0, decay, 0.0);
        let before = similarity(&vector(&a, &flat), &vector(&b, &flat));
        let after = similarity(&vector(&a, &deep), &vector(&b, &deep));
        prop_assert!(after + 1e-12 >= before);
    }
}

/// Cosine can drop when a shared ancestor is added to vectors that already
/// overlap; the disjoint-support property above is the one that holds.
#[test]
fn shared_ancestor_can_lower_cosine() {
    let v =
        |pairs: &[(&str, f64)]| -> ConceptVector { pairs.iter().map(|(k, x)| (k.to_string(), *x)).collect() };
    let a = v(&[("X", 1.0), ("A", 1.0)]);
    let b = v(&[("X", 100.0), ("B", 1.0)]);
    let a2 = v(&[("X", 1.0), ("A", 1.0), ("P", 0.5)]);
    let b2 = v(&[("X", 100.0), ("B", 1.0), ("P", 0.5)]);
    assert!(similarity(&a2, &b2) < similarity(&a, &b));
}

#[test]
fn fixture_formulas_render_well_formed_mathml() {
    let ix = fixture_index();
    let mut rendered = 0;
    for entry in ix.documents() {
        for segment in &entry.doc.segments {
            for formula in segment.formulas.iter().filter_map(|f| f.ast.as_ref()) {
                let xml = to_mathml_marked(&formula.root, &[NodePath::root()]);
                assert_eq!(highlight_count(&xml), 1);
                rendered += 1;
            }
        }
    }
    assert!(rendered > 100);
}

#[test]
fn snapshot_round_trip_keeps_answers() {
    let ix = fixture_index();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    ix.save(&path).unwrap();
    let loaded = Index::load(&path).unwrap();
    assert_eq!(loaded.build_stamp(), ix.build_stamp());
    assert_eq!(loaded.len(), ix.len());
    for concept in ["Polygon", "Curvature", "FiniteGroup"] {
        let q = SemanticQuery::new([concept]);
        let a = serde_json::to_string(&search_formula_semantic(ix, &q).unwrap()).unwrap();
        let b = serde_json::to_string(&search_formula_semantic(&loaded, &q).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn snippets_for_every_hit() {
    let ix = fixture_index();
    let mut hits = search_formula_semantic(ix, &SemanticQuery::new(["Polygon"])).unwrap();
    hits.extend(
        search_segments(
            ix,
            SegmentType::Theorem,
            SegmentRelationKind::Proves,
            "FermatTheorem",
        )
        .unwrap(),
    );
    for hit in &hits {
        let snippet = highlight(hit, ix).unwrap();
        assert!(!snippet.text.is_empty());
        for mark in &snippet.marks {
            assert!(mark.start < mark.end && mark.end <= snippet.text.len());
        }
        if let Some(xml) = &snippet.mathml {
            assert!(highlight_count(xml) >= 1);
        }
    }
}

#[test]
fn segment_hits_have_requested_type() {
    let ix = fixture_index();
    let kinds = [
        (SegmentType::Theorem, SegmentRelationKind::Proves, "Extremum"),
        (
            SegmentType::Proof,
            SegmentRelationKind::RefersTo,
            "StationaryPoint",
        ),
        (SegmentType::Example, SegmentRelationKind::Exemplifies, "Matrix"),
    ];
    for (kind, via, target) in kinds {
        for hit in search_segments(ix, kind, via, target).unwrap() {
            let (_, segment) = ix.segment(&hit.segment_id).unwrap();
            assert_eq!(segment.segment_type, kind);
        }
    }
}

#[test]
fn aggregate_results_sorted_and_unique() {
    let ix = fixture_index();
    let criteria = [
        AggregateCriteria {
            segment_type: None,
            area: Some("Geometry".into()),
            object: None,
        },
        AggregateCriteria {
            segment_type: Some(SegmentType::Theorem),
            area: None,
            object: None,
        },
        AggregateCriteria {
            segment_type: None,
            area: None,
            object: Some("Triangle".into()),
        },
    ];
    for c in criteria {
        let results = aggregate(ix, &c).unwrap();
        assert!(!results.is_empty());
        assert!(results.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn fixture_shape() {
    let files = std::fs::read_dir(corpus_dir()).unwrap().count();
    assert!(files >= 20);
    let ix = fixture_index();
    let russian = ix
        .documents()
        .iter()
        .filter(|d| d.doc.metadata.language == mathkb::ontology::Lang::Ru)
        .count();
    assert!(russian >= 3);
    let o: &Ontology = ix.ontology();
    assert!(o.len() >= 60);
    let children: Vec<String> = o
        .concept_ids()
        .filter(|c| o.direct_parents(c).contains("Polygon"))
        .map(str::to_string)
        .collect();
    assert_eq!(children, ["Hexagon", "Parallelogram", "Trapezium", "Triangle"]);
    let counts: BTreeMap<&str, usize> = ix
        .documents()
        .iter()
        .map(|d| (d.doc.id.as_str(), d.annotations.annotations.len()))
        .collect();
    assert!(counts.values().all(|&n| n > 0), "{counts:?}");
}
