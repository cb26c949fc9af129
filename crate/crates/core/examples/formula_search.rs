//! Parses formulas, shows their canonical skeletons and runs a syntactic
//! pattern search over the fixture corpus.
//!
//! cargo run --example formula_search -- ['?a^2 + ?b^2 = ?c^2']

use std::path::PathBuf;
use std::sync::Arc;

use mathkb::annotator::BindingPatterns;
use mathkb::formula::{normalize, parse_tex_formula, to_mathml, FormulaPattern};
use mathkb::interface::ingest_dir;
use mathkb::ontology::load_ontology_file;
use mathkb::search::search_formula_syntactic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "?a^2 + ?b^2 = ?c^2".to_string());

    for tex in ["x^2 + y^2 = z^2", "a^2 + b^2 = c^2", "\\frac{1}{2} a h"] {
        let ast = parse_tex_formula(tex)?;
        let canonical = normalize(&ast);
        println!(
            "{tex:<20} key {}  digest {:016x}",
            canonical.key(),
            canonical.digest()
        );
    }
    println!("{}", to_mathml(&parse_tex_formula("S = \\pi r^2")?));

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let ontology = Arc::new(load_ontology_file(fixtures.join("ontology.json"))?);
    let (ix, _) = ingest_dir(&fixtures.join("corpus"), ontology, &BindingPatterns::default())?;

    let pattern = FormulaPattern::parse(&source)?;
    println!("\npattern {source}");
    for hit in search_formula_syntactic(&ix, &pattern) {
        let (_, _, formula) = ix
            .formula(hit.formula_id.as_deref().unwrap_or_default())
            .expect("indexed");
        println!("  {:<22} score {:>3}  ${}$", formula.id, hit.score, formula.tex);
    }
    Ok(())
}
