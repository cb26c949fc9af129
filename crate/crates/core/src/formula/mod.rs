//! TeX math fragments: parsing, Presentation MathML output, renaming-invariant
//! canonical forms and wildcard pattern matching.

mod ast;
mod canonical;
mod mathml;
mod parser;
mod pattern;
mod tex;

pub use ast::*;
pub use canonical::{key_digest, normalize, normalize_node, structural_key, CanonicalForm};
pub use mathml::{node_to_mathml, to_mathml, to_mathml_marked};
pub use parser::{parse_tex_formula, ParseError};
pub use pattern::{match_at, match_pattern, subterms, subterms_of, FormulaPattern, MatchResult};
pub use tex::to_tex;
