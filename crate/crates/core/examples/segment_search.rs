//! Structural queries over typed segments: theorems whose proofs use a
//! result, examples of a concept, and aggregation by area and type.
//!
//! cargo run --example segment_search -- ["Fermat's theorem"]

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::annotator::BindingPatterns;
use mathkb::document::{SegmentRelationKind, SegmentType};
use mathkb::interface::ingest_dir;
use mathkb::ontology::load_ontology_file;
use mathkb::search::{aggregate, search_segments, AggregateCriteria};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Fermat's theorem".to_string());

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ontology = Arc::new(load_ontology_file(fixtures.join("ontology.json"))?);
    let (ix, _) = ingest_dir(&fixtures.join("corpus"), ontology, &BindingPatterns::default())?;

    println!("theorems proved using {target}:");
    for hit in search_segments(&ix, SegmentType::Theorem, SegmentRelationKind::Proves, &target)? {
        println!("  {}  {}", hit.segment_id, hit.explain.join("; "));
    }

    println!("\nexamples that exemplify Matrix:");
    for hit in search_segments(
        &ix,
        SegmentType::Example,
        SegmentRelationKind::Exemplifies,
        "Matrix",
    )? {
        println!("  {}", hit.segment_id);
    }

    let criteria = AggregateCriteria {
        segment_type: Some(SegmentType::Theorem),
        area: Some("GroupTheory".to_string()),
        object: None,
    };
    println!("\ntheorems in group theory and its subfields:");
    for r in aggregate(&ix, &criteria)? {
        println!("  {}", r.segment_id);
    }
    Ok(())
}
