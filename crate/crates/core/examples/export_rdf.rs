//! Exports one fixture document as N-Triples and Turtle.
//!
//! cargo run --example export_rdf -- [doc_id] [base IRI]

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::annotator::BindingPatterns;
use mathkb::interface::{document_rdf, ingest_dir, DEFAULT_BASE_IRI};
use mathkb::ontology::load_ontology_file;
use mathkb::rdf::RdfFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let doc_id = args.next().unwrap_or_else(|| "circle".to_string());
    let base = args.next().unwrap_or_else(|| DEFAULT_BASE_IRI.to_string());

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ontology = Arc::new(load_ontology_file(fixtures.join("ontology.json"))?);
    let (ix, _) = ingest_dir(&fixtures.join("corpus"), ontology, &BindingPatterns::default())?;

    let nt = document_rdf(&ix, &doc_id, &base, RdfFormat::NTriples)?;
    let ttl = document_rdf(&ix, &doc_id, &base, RdfFormat::Turtle)?;
    println!("{} triples\n", nt.iter().filter(|&&b| b == b'\n').count());
    print!("{}", String::from_utf8(ttl)?);
    Ok(())
}
