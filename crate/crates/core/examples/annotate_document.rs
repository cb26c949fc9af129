//! Parses one LaTeX article and prints its segments, formulas, concept
//! annotations and variable bindings.
//!
//! cargo run --example annotate_document -- [article.tex] [ontology.json]

use std::path::PathBuf;

use mathkb::annotator::{annotate_document, BindingPatterns, Gazetteer};
use mathkb::document::parse_document;
use mathkb::ontology::load_ontology_file;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut args = std::env::args().skip(1);
    let article = args
        .next()
        .map(PathBuf::from)
        .unwrap_or(fixtures.join("corpus/circle.tex"));
    let ontology = args
        .next()
        .map(PathBuf::from)
        .unwrap_or(fixtures.join("ontology.json"));

    let o = load_ontology_file(&ontology)?;
    let id = article.file_stem().and_then(|s| s.to_str()).unwrap_or("doc");
    let doc = parse_document(std::fs::read(&article)?, id)?;
    let ann = annotate_document(&doc, &Gazetteer::new(&o), &o, &BindingPatterns::default());

    println!("{} [{:?}] {}", doc.id, doc.metadata.language, doc.metadata.title);
    for seg in &doc.segments {
        println!(
            "{} {:?} {}",
            seg.id,
            seg.segment_type,
            seg.label.as_deref().unwrap_or("-")
        );
        for f in &seg.formulas {
            match &f.error {
                Some(e) => println!("  {} ${}$ (unparsed: {e})", f.id, f.tex),
                None => println!("  {} ${}$", f.id, f.tex),
            }
        }
        for a in ann.annotations.iter().filter(|a| a.segment_id == seg.id) {
            let flag = if a.ambiguous { " ambiguous" } else { "" };
            println!("  \"{}\" -> {}{flag}", a.surface, a.concept_id);
        }
        for b in ann.bindings.iter().filter(|b| b.segment_id == seg.id) {
            println!("  {} in {} -> {}", b.symbol, b.formula_id, b.concept_id);
        }
    }
    for r in &doc.relations {
        println!("{} {:?} {}", r.src, r.kind, r.dst);
    }
    println!("keyword concepts: {}", ann.keyword_concepts.join(", "));
    Ok(())
}
