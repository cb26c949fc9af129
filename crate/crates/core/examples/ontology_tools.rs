//! Loads and validates an ontology, walks the IsA hierarchy and completes
//! labels in both languages.
//!
//! cargo run --example ontology_tools -- [ontology.json] [concept]

use std::path::PathBuf;

use mathkb::ontology::{load_ontology_file, validate, Lang};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or(fixtures.join("ontology.json"));
    let concept = args.next().unwrap_or_else(|| "Triangle".to_string());

    let o = load_ontology_file(&path)?;
    println!("{} concepts, {} edges", o.len(), o.edges().len());
    println!("{}", validate(&o));

    let ancestors: Vec<String> = o
        .ancestors(&concept)?
        .into_iter()
        .filter(|c| *c != concept)
        .collect();
    println!("\n{concept}: ancestors {}", ancestors.join(", "));
    println!(
        "{concept}: areas {}",
        o.areas_of(&concept).into_iter().collect::<Vec<_>>().join(", ")
    );

    for (prefix, lang) in [("poly", Some(Lang::En)), ("кри", Some(Lang::Ru)), ("gr", None)] {
        let labels: Vec<String> = o
            .suggest(prefix, lang, 5)
            .into_iter()
            .map(|s| format!("{} ({})", s.label, s.id))
            .collect();
        println!("suggest '{prefix}': {}", labels.join(", "));
    }
    println!("'order' names {:?}", o.find_by_label("order", None));
    Ok(())
}
