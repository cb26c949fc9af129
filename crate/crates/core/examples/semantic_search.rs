//! Concept-based formula search with hierarchy expansion, segment scope and
//! highlighted snippets.
//!
//! cargo run --example semantic_search -- [Polygon[,Concept...]] [Theorem]

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::annotator::BindingPatterns;
use mathkb::document::SegmentType;
use mathkb::interface::{ingest_dir, split_concepts};
use mathkb::ontology::load_ontology_file;
use mathkb::search::{highlight, search_formula_semantic, SemanticQuery};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let concepts = split_concepts(&args.next().unwrap_or_else(|| "Polygon".to_string()));
    let scope = args.next();

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ontology = Arc::new(load_ontology_file(fixtures.join("ontology.json"))?);
    let (ix, _) = ingest_dir(&fixtures.join("corpus"), ontology, &BindingPatterns::default())?;

    for concept in &concepts {
        let family: Vec<String> = ix.ontology().descendants(concept)?.into_iter().collect();
        println!("{concept} expands to {}", family.join(", "));
    }
    let mut query = SemanticQuery::new(concepts.clone());
    if let Some(name) = scope {
        query = query.scope(SegmentType::parse(&name).ok_or(format!("unknown segment type {name}"))?);
    }
    let hits = search_formula_semantic(&ix, &query)?;
    let narrow = search_formula_semantic(&ix, &query.clone().expand(false))?;
    println!(
        "{} hits expanded, {} without expansion\n",
        hits.len(),
        narrow.len()
    );

    for hit in hits.iter().take(8) {
        let snippet = highlight(hit, &ix)?;
        println!(
            "{} (score {:.1})",
            hit.formula_id.as_deref().unwrap_or(&hit.segment_id),
            hit.score
        );
        for line in &hit.explain {
            println!("  {line}");
        }
        println!("  ...{}...", snippet.text.replace('\n', " "));
    }
    Ok(())
}
