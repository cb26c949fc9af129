//! Profile-dependent recommendations of related documents.
//!
//! cargo run --example recommend -- [doc_id]

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::annotator::BindingPatterns;
use mathkb::interface::ingest_dir;
use mathkb::ontology::load_ontology_file;
use mathkb::recommender::{doc_areas, recommend, ProfileSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc_id = std::env::args().nth(1).unwrap_or_else(|| "polygons".to_string());

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ontology = Arc::new(load_ontology_file(fixtures.join("ontology.json"))?);
    let (ix, _) = ingest_dir(&fixtures.join("corpus"), ontology, &BindingPatterns::default())?;
    let profiles = ProfileSet::load(fixtures.join("profiles.json"))?;

    for name in profiles.names() {
        let profile = profiles.get(name)?;
        println!("{name}:");
        for r in recommend(&ix, &doc_id, profile, 4)? {
            let areas = doc_areas(ix.document(&r.doc_id).expect("indexed"), ix.ontology());
            println!("  {:<20} {:.3}  areas: {}", r.doc_id, r.score, areas.len());
        }
    }
    Ok(())
}
